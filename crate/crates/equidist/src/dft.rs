//! Prime-length discrete Fourier transforms with a positive-exponent kernel.
//!
//! The spectrum code needs `out[v] = sum_g x[g] e^(2*pi*i*v*g/p)` for prime
//! `p`. Small lengths use the naive O(p^2) matrix application, which doubles
//! as the reference in tests; larger lengths switch to the Bluestein chirp-z
//! reduction onto a power-of-two FFT. Both paths are single-threaded and
//! allocation order is fixed, so results are bit-identical across runs and
//! thread counts.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Lengths up to this use the quadratic direct transform.
pub(crate) const NAIVE_LIMIT: usize = 512;

/// Unit roots `w[k] = e^(2*pi*i*k/p)` with the upper half mirrored as exact
/// conjugates of the lower half, so conjugate symmetry of real-input
/// transforms holds to the last bit.
pub(crate) fn unit_roots(p: usize) -> Vec<Complex64> {
    let mut w = vec![Complex64::new(1.0, 0.0); p];
    for k in 1..=p / 2 {
        let angle = 2.0 * PI * k as f64 / p as f64;
        w[k] = Complex64::new(angle.cos(), angle.sin());
        w[p - k] = w[k].conj();
    }
    w
}

pub(crate) struct PrimeDft {
    p: usize,
    kind: Kind,
}

enum Kind {
    Naive {
        roots: Vec<Complex64>,
    },
    Bluestein {
        fft: Fft,
        /// `chirp[k] = e^(i*pi*k^2/p)`, with `k^2` reduced mod `2p`.
        chirp: Vec<Complex64>,
        /// Forward FFT of the wrapped conjugate-chirp kernel, pre-scaled by 1/M.
        kernel_fft: Vec<Complex64>,
    },
}

impl PrimeDft {
    pub fn new(p: usize) -> Self {
        Self::with_limit(p, NAIVE_LIMIT)
    }

    /// Testing hook: force the Bluestein path by passing a small limit.
    pub fn with_limit(p: usize, naive_limit: usize) -> Self {
        assert!(p >= 2);
        if p <= naive_limit {
            PrimeDft {
                p,
                kind: Kind::Naive {
                    roots: unit_roots(p),
                },
            }
        } else {
            let m = (2 * p - 1).next_power_of_two();
            let fft = Fft::new(m);
            let two_p = 2 * p as u128;
            let chirp: Vec<Complex64> = (0..p)
                .map(|k| {
                    let sq = (k as u128 * k as u128) % two_p;
                    let angle = PI * sq as f64 / p as f64;
                    Complex64::new(angle.cos(), angle.sin())
                })
                .collect();
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            kernel[0] = chirp[0].conj();
            for k in 1..p {
                let c = chirp[k].conj();
                kernel[k] = c;
                kernel[m - k] = c;
            }
            fft.forward(&mut kernel);
            let scale = 1.0 / m as f64;
            for z in &mut kernel {
                *z *= scale;
            }
            PrimeDft {
                p,
                kind: Kind::Bluestein {
                    fft,
                    chirp,
                    kernel_fft: kernel,
                },
            }
        }
    }

    pub fn len(&self) -> usize {
        self.p
    }

    /// `out[v] = sum_g input[g] e^(2*pi*i*v*g/p)`.
    pub fn transform(&self, input: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(input.len(), self.p);
        assert_eq!(out.len(), self.p);
        match &self.kind {
            Kind::Naive { roots } => {
                let p = self.p as u64;
                for (v, slot) in out.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let v = v as u64;
                    for (g, &x) in input.iter().enumerate() {
                        acc += x * roots[((v * g as u64) % p) as usize];
                    }
                    *slot = acc;
                }
            }
            Kind::Bluestein {
                fft,
                chirp,
                kernel_fft,
            } => {
                // v*g = (v^2 + g^2 - (v-g)^2)/2, so the transform is a linear
                // convolution of x[g]*chirp[g] with conj(chirp), re-multiplied
                // by chirp[v].
                let m = fft.len();
                let mut a = vec![Complex64::new(0.0, 0.0); m];
                for (g, (&x, &c)) in input.iter().zip(chirp).enumerate() {
                    a[g] = x * c;
                }
                fft.forward(&mut a);
                for (z, &k) in a.iter_mut().zip(kernel_fft) {
                    *z *= k;
                }
                fft.inverse_unscaled(&mut a);
                for (v, slot) in out.iter_mut().enumerate() {
                    *slot = chirp[v] * a[v];
                }
            }
        }
    }
}

/// Plain iterative radix-2 FFT (decimation in time, bit-reversed input
/// ordering), used as the convolution engine for Bluestein.
struct Fft {
    n: usize,
    /// `e^(-2*pi*i*k/n)` for `k < n/2`.
    twiddles: Vec<Complex64>,
}

impl Fft {
    fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2);
        let twiddles = (0..n / 2)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        Fft { n, twiddles }
    }

    fn len(&self) -> usize {
        self.n
    }

    fn forward(&self, data: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        // bit-reversal permutation
        let shift = (n.leading_zeros() + 1) as usize;
        for i in 0..n {
            let j = i.reverse_bits() >> shift;
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for block in data.chunks_exact_mut(len) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let t = block[k + half] * w;
                    let u = block[k];
                    block[k] = u + t;
                    block[k + half] = u - t;
                }
            }
            len *= 2;
        }
    }

    /// Inverse transform without the 1/n factor (folded into the kernel).
    fn inverse_unscaled(&self, data: &mut [Complex64]) {
        for z in data.iter_mut() {
            *z = z.conj();
        }
        self.forward(data);
        for z in data.iter_mut() {
            *z = z.conj();
        }
    }
}
