//! Hermite polynomial evaluation in sign/log-magnitude form.
//!
//! Physicists' Hermite polynomials grow super-exponentially in the degree, so
//! the squeezed-state weights need them in log space. The three-term
//! recurrence H_{n+1} = 2x H_n - 2n H_{n-1} is carried with a running scale
//! factor that is folded into the logarithm before the values can overflow.

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BELOW: f64 = 1e-250;

/// Iterator over (log|H_n(x)|, sign of H_n(x)) for n = 0, 1, 2, ...
///
/// A single pass over this iterator tabulates a whole weight table in O(n);
/// [`hermite_log`] is the random-access wrapper.
pub struct HermiteLogSeq {
    x: f64,
    degree: u64, // degree of `cur`
    prev: f64,   // H_{degree-1} / e^scale (0 before the first step)
    cur: f64,    // H_degree / e^scale
    scale: f64,
}

impl HermiteLogSeq {
    pub fn new(x: f64) -> Self {
        Self {
            x,
            degree: 0,
            prev: 0.0,
            cur: 1.0,
            scale: 0.0,
        }
    }
}

impl Iterator for HermiteLogSeq {
    type Item = (f64, i8);

    fn next(&mut self) -> Option<(f64, i8)> {
        let item = if self.cur == 0.0 {
            (f64::NEG_INFINITY, 0)
        } else {
            let sign = if self.cur > 0.0 { 1 } else { -1 };
            (self.scale + self.cur.abs().ln(), sign)
        };
        let next = 2.0 * self.x * self.cur - 2.0 * self.degree as f64 * self.prev;
        self.prev = self.cur;
        self.cur = next;
        self.degree += 1;
        let mag = self.cur.abs().max(self.prev.abs());
        if mag > RESCALE_ABOVE || (mag > 0.0 && mag < RESCALE_BELOW) {
            self.scale += mag.ln();
            self.cur /= mag;
            self.prev /= mag;
        }
        Some(item)
    }
}

/// log|H_n(x)| and the sign of H_n(x) (0 when the value is exactly zero, with
/// log-magnitude -inf). Stable for degrees up to at least 5000.
pub fn hermite_log(n: u64, x: f64) -> (f64, i8) {
    HermiteLogSeq::new(x)
        .nth(n as usize)
        .expect("sequence is infinite")
}
