//! Exact squared Euclidean distance transform (Felzenszwalb-Huttenlocher),
//! applied separably along each axis of a row-major grid.

/// Squared distance, in cells, from every node to the nearest `true` node;
/// `f64::INFINITY` everywhere when the set is empty.
pub fn squared_distance(mask: &[bool], shape: &[usize]) -> Vec<f64> {
    let mut f: Vec<f64> = mask
        .iter()
        .map(|&m| if m { 0.0 } else { f64::INFINITY })
        .collect();
    if !mask.iter().any(|&m| m) {
        return f;
    }
    let n = f.len();
    let mut stride = 1;
    for axis in (0..shape.len()).rev() {
        let len = shape[axis];
        let block = stride * len;
        let mut line = vec![0.0; len];
        let mut out = vec![0.0; len];
        let mut scratch = Scratch::new(len);
        for start in (0..n).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (i, l) in line.iter_mut().enumerate() {
                    *l = f[base + i * stride];
                }
                transform_1d(&line, &mut out, &mut scratch);
                for (i, o) in out.iter().enumerate() {
                    f[base + i * stride] = *o;
                }
            }
        }
        stride = block;
    }
    f
}

struct Scratch {
    v: Vec<usize>,
    z: Vec<f64>,
}

impl Scratch {
    fn new(len: usize) -> Self {
        Scratch {
            v: vec![0; len],
            z: vec![0.0; len + 1],
        }
    }
}

/// Lower envelope of parabolas `(q - p)² + f(p)`.
fn transform_1d(f: &[f64], out: &mut [f64], s: &mut Scratch) {
    let n = f.len();
    let Some(first) = f.iter().position(|x| x.is_finite()) else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    let mut k = 0;
    s.v[0] = first;
    s.z[0] = f64::NEG_INFINITY;
    s.z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = s.v[k];
            let sx =
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            // z[0] = -inf, so k never underflows.
            if sx <= s.z[k] {
                k -= 1;
                continue;
            }
            k += 1;
            s.v[k] = q;
            s.z[k] = sx;
            s.z[k + 1] = f64::INFINITY;
            break;
        }
    }
    let mut j = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while s.z[j + 1] < q as f64 {
            j += 1;
        }
        let p = s.v[j];
        let dq = q as f64 - p as f64;
        *o = dq * dq + f[p];
    }
}
