//! Complex FFT for arbitrary lengths.
//!
//! Power-of-two sizes use an iterative radix-2 transform; every other size
//! goes through Bluestein's chirp-z algorithm on top of it. Unnormalized in
//! both directions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

pub(crate) struct Fft {
    len: usize,
    kind: Kind,
}

enum Kind {
    Radix2(Radix2),
    Bluestein {
        inner: Radix2,
        // exp(-i*pi*k^2/n)
        chirp: Vec<Complex64>,
        // FFT of the conjugate chirp, wrapped into the inner length
        kernel: Vec<Complex64>,
    },
}

struct Radix2 {
    len: usize,
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        Self { len, twiddles }
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.len;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let step = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

impl Fft {
    pub(crate) fn new(len: usize) -> Self {
        if len.is_power_of_two() || len == 0 {
            return Self {
                len,
                kind: Kind::Radix2(Radix2::new(len.max(1))),
            };
        }
        let inner_len = (2 * len - 1).next_power_of_two();
        let inner = Radix2::new(inner_len);
        let chirp: Vec<Complex64> = (0..len)
            .map(|k| {
                // k^2 mod 2n keeps the phase argument small for long inputs
                let k2 = ((k as u128 * k as u128) % (2 * len as u128)) as f64;
                Complex64::from_polar(1.0, -PI * k2 / len as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); inner_len];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            kernel[k] = chirp[k].conj();
            kernel[inner_len - k] = chirp[k].conj();
        }
        inner.process(&mut kernel, false);
        Self {
            len,
            kind: Kind::Bluestein {
                inner,
                chirp,
                kernel,
            },
        }
    }

    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.process(buf, false);
    }

    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.process(buf, true);
    }

    fn process(&self, buf: &mut [Complex64], inverse: bool) {
        assert_eq!(buf.len(), self.len, "fft buffer length");
        match &self.kind {
            Kind::Radix2(r) => {
                if self.len > 0 {
                    r.process(buf, inverse)
                }
            }
            Kind::Bluestein {
                inner,
                chirp,
                kernel,
            } => {
                // The inverse transform is the forward transform with conjugated
                // input and output.
                let m = inner.len;
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for (k, (w, &x)) in work.iter_mut().zip(buf.iter()).enumerate() {
                    let x = if inverse { x.conj() } else { x };
                    *w = x * chirp[k];
                }
                inner.process(&mut work, false);
                for (w, &h) in work.iter_mut().zip(kernel.iter()) {
                    *w *= h;
                }
                inner.process(&mut work, true);
                let scale = 1.0 / m as f64;
                for (k, out) in buf.iter_mut().enumerate() {
                    let y = work[k] * chirp[k] * scale;
                    *out = if inverse { y.conj() } else { y };
                }
            }
        }
    }
}
