use std::cell::RefCell;

use rustfft::FftPlanner;

use crate::Complex64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized in-place DFT over every axis of a row-major cube `n^dim`.
pub(super) fn transform_nd(buf: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // Last axis is contiguous.
    for line in buf.chunks_exact_mut(n) {
        fft.process_with_scratch(line, &mut scratch);
    }
    if dim == 1 {
        return;
    }

    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..buf.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = buf[start + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    buf[start + k * stride] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(data: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for p in 0..n {
            for q in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..n {
                    for b in 0..n {
                        let phase = -2.0 * std::f64::consts::PI * ((p * a + q * b) as f64) / n as f64;
                        acc += data[a * n + b] * Complex64::from_polar(1.0, phase);
                    }
                }
                out[p * n + q] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_2d_dft() {
        let n = 16;
        let data: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut buf = data.clone();
        transform_nd(&mut buf, n, 2, false);
        let naive = naive_dft_2d(&data, n);
        for (a, b) in buf.iter().zip(&naive) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}
