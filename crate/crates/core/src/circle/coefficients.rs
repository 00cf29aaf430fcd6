//! Laurent coefficients `c_k`, `|k| <= K`, of functions and hyperfunctions on the unit circle.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logdomain::{log_add, wrap_angle, LogComplex};
use crate::sequences::WeightSequence;

/// Closed-form coefficient families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoeffGenerator {
    /// `c_k = e^{a |k|^p}`; `p = 0` is read as the constant `e^a`.
    ExpPower { a: f64, p: f64 },
    /// `c_k = ratio^k` for `k >= 0`, zero for `k < 0`.
    OneSided { ratio: f64 },
    /// `c_k = 1` at `k = index`, zero elsewhere.
    Monomial { index: i64 },
}

impl CoeffGenerator {
    pub fn ln_abs_coefficient(&self, k: i64) -> LogComplex<f64> {
        match *self {
            CoeffGenerator::ExpPower { a, p } => {
                let m = k.unsigned_abs() as f64;
                let e = if p == 0.0 { 1.0 } else { m.powf(p) };
                LogComplex::from_polar_log(a * e, 0.0)
            }
            CoeffGenerator::OneSided { ratio } => {
                if k < 0 {
                    LogComplex::zero()
                } else if k == 0 {
                    LogComplex::one()
                } else if ratio == 0.0 {
                    LogComplex::zero()
                } else {
                    let arg = if ratio < 0.0 && k % 2 == 1 { std::f64::consts::PI } else { 0.0 };
                    LogComplex::from_polar_log(k as f64 * ratio.abs().ln(), arg)
                }
            }
            CoeffGenerator::Monomial { index } => {
                if k == index {
                    LogComplex::one()
                } else {
                    LogComplex::zero()
                }
            }
        }
    }

    /// Decay bound valid for every `|k| > k_min`.
    pub fn certificate(&self) -> TailCertificate {
        match *self {
            CoeffGenerator::ExpPower { a, p } if a < 0.0 && p >= 1.0 => {
                TailCertificate::Decay { ln_c: 0.0, beta: -a, power: p }
            }
            CoeffGenerator::OneSided { ratio } if ratio.abs() < 1.0 => {
                if ratio == 0.0 {
                    TailCertificate::Exact
                } else {
                    TailCertificate::Decay { ln_c: 0.0, beta: -ratio.abs().ln(), power: 1.0 }
                }
            }
            CoeffGenerator::Monomial { .. } => TailCertificate::Exact,
            _ => TailCertificate::None,
        }
    }
}

/// What is known about the coefficients beyond the stored range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailCertificate {
    /// Nothing stored is missing: `c_k = 0` for `|k| > K`.
    Exact,
    /// `|c_k| <= e^{ln_c − beta |k|^power}` for `|k| > K`.
    Decay {
        ln_c: f64,
        beta: f64,
        power: f64,
    },
    None,
}

impl TailCertificate {
    /// `ln Σ_{|k|>K} λ^{|k|} |c_k|`, `+inf` when the certificate does not cover radius `λ`.
    pub fn ln_weighted_tail(&self, k_max: u64, lambda: f64) -> f64 {
        match *self {
            TailCertificate::Exact => f64::NEG_INFINITY,
            TailCertificate::None => f64::INFINITY,
            TailCertificate::Decay { ln_c, beta, power } => {
                if power < 1.0 || beta <= 0.0 {
                    return f64::INFINITY;
                }
                // term ratio beyond k is at most λ e^{−β p k^{p−1}}, decreasing in k
                let k0 = (k_max + 1) as f64;
                let ln_q = lambda.ln() - beta * power * k0.powf(power - 1.0);
                if ln_q >= 0.0 {
                    return f64::INFINITY;
                }
                let first = ln_c + k0 * lambda.ln() - beta * k0.powf(power);
                std::f64::consts::LN_2 + first - (-ln_q.exp_m1()).ln()
            }
        }
    }

    /// `ln sup_{|k|>K} λ^{|k|} |c_k|`.
    pub fn ln_weighted_sup(&self, k_max: u64, lambda: f64) -> f64 {
        match *self {
            TailCertificate::Exact => f64::NEG_INFINITY,
            TailCertificate::None => f64::INFINITY,
            TailCertificate::Decay { ln_c, beta, power } => {
                let ll = lambda.ln();
                let k0 = (k_max + 1) as f64;
                if power < 1.0 || beta <= 0.0 || (power == 1.0 && beta <= ll) {
                    return f64::INFINITY;
                }
                let g = |k: f64| ln_c + k * ll - beta * k.powf(power);
                if power == 1.0 {
                    return g(k0);
                }
                // k ln λ − β k^p peaks at k* = (ln λ / (β p))^{1/(p−1)}
                let peak = (ll.max(0.0) / (beta * power)).powf(1.0 / (power - 1.0));
                g(k0.max(peak))
            }
        }
    }
}

/// Coefficients `c_k`, `|k| <= K`, held as `(ln|c_k|, arg c_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierSeq {
    k_max: u64,
    coefficients: Vec<LogComplex<f64>>,
    generator: Option<CoeffGenerator>,
    tail: TailCertificate,
}

impl FourierSeq {
    /// Stored values for `k = -K..=K`.
    pub fn from_coefficients(coefficients: Vec<LogComplex<f64>>, tail: TailCertificate) -> Result<Self> {
        if coefficients.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("expected 2K+1 coefficients, got {}", coefficients.len())));
        }
        if coefficients.iter().any(|c| c.ln_abs.is_nan() || c.ln_abs == f64::INFINITY || c.arg.is_nan()) {
            return Err(Error::InvalidParameter("coefficient is not finite".into()));
        }
        let k_max = (coefficients.len() / 2) as u64;
        Ok(Self { k_max, coefficients, generator: None, tail })
    }

    /// Laurent polynomial from complex values at `k = -K..=K`.
    pub fn from_complex(values: &[num_complex::Complex<f64>]) -> Result<Self> {
        Self::from_coefficients(values.iter().map(|&z| LogComplex::from_complex(z)).collect(), TailCertificate::Exact)
    }

    /// Finitely supported sequence with the listed nonzero entries.
    pub fn sparse(k_max: u64, entries: &[(i64, f64)]) -> Result<Self> {
        let mut c = vec![LogComplex::zero(); 2 * k_max as usize + 1];
        for &(k, v) in entries {
            if k.unsigned_abs() > k_max {
                return Err(Error::TruncationExceedsK { cutoff: k.unsigned_abs(), k: k_max });
            }
            c[(k + k_max as i64) as usize] = LogComplex::from_real(v);
        }
        Self::from_coefficients(c, TailCertificate::Exact)
    }

    pub fn from_generator(generator: CoeffGenerator, k_max: u64) -> Self {
        let k = k_max as i64;
        let coefficients = (-k..=k).map(|i| generator.ln_abs_coefficient(i)).collect();
        let tail = generator.certificate();
        Self { k_max, coefficients, generator: Some(generator), tail }
    }

    /// Same series stored up to `|k| <= k_max`; needs a generator to grow.
    pub fn extended(&self, k_max: u64) -> Result<Self> {
        if k_max <= self.k_max {
            return self.truncated(k_max);
        }
        match &self.generator {
            Some(g) => Ok(Self::from_generator(g.clone(), k_max)),
            None if self.tail == TailCertificate::Exact => {
                let pad = (k_max - self.k_max) as usize;
                let mut c = vec![LogComplex::zero(); pad];
                c.extend_from_slice(&self.coefficients);
                c.extend(std::iter::repeat_n(LogComplex::zero(), pad));
                Ok(Self { k_max, coefficients: c, generator: None, tail: TailCertificate::Exact })
            }
            None => Err(Error::TruncationExceedsK { cutoff: k_max, k: self.k_max }),
        }
    }

    /// Keeps `|k| <= k_max` and drops the rest, so the result is exactly a Laurent polynomial.
    pub fn truncated(&self, k_max: u64) -> Result<Self> {
        if k_max > self.k_max {
            return Err(Error::TruncationExceedsK { cutoff: k_max, k: self.k_max });
        }
        let lo = (self.k_max - k_max) as usize;
        let c = self.coefficients[lo..lo + 2 * k_max as usize + 1].to_vec();
        Ok(Self { k_max, coefficients: c, generator: None, tail: TailCertificate::Exact })
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    pub fn generator(&self) -> Option<&CoeffGenerator> {
        self.generator.as_ref()
    }

    pub fn tail(&self) -> TailCertificate {
        self.tail
    }

    /// Replaces the tail certificate.
    pub fn with_tail(mut self, tail: TailCertificate) -> Self {
        self.tail = tail;
        self
    }

    pub fn coefficients(&self) -> &[LogComplex<f64>] {
        &self.coefficients
    }

    /// `c_k`, zero outside the stored range of an exact sequence.
    pub fn get(&self, k: i64) -> Option<LogComplex<f64>> {
        if k.unsigned_abs() <= self.k_max {
            Some(self.coefficients[(k + self.k_max as i64) as usize])
        } else if self.tail == TailCertificate::Exact {
            Some(LogComplex::zero())
        } else {
            self.generator.as_ref().map(|g| g.ln_abs_coefficient(k))
        }
    }

    pub fn ln_abs(&self, k: i64) -> f64 {
        self.get(k).map_or(f64::NAN, |c| c.ln_abs)
    }

    /// Largest `|k|` with a nonzero stored coefficient, `None` for the zero sequence.
    pub fn degree(&self) -> Option<u64> {
        let k = self.k_max as i64;
        (0..=k)
            .rev()
            .find(|&d| !self.coefficients[(k + d) as usize].is_zero() || !self.coefficients[(k - d) as usize].is_zero())
            .map(|d| d as u64)
    }

    /// Whether the generator reproduces every stored value bit for bit.
    pub fn generator_matches(&self) -> bool {
        match &self.generator {
            None => true,
            Some(g) => (-(self.k_max as i64)..=self.k_max as i64)
                .all(|k| g.ln_abs_coefficient(k) == self.coefficients[(k + self.k_max as i64) as usize]),
        }
    }

    /// `ln Σ_{c < |k| <= K} λ^{|k|}|c_k|` plus the certified tail beyond `K`.
    pub fn ln_weighted_l1_beyond(&self, cutoff: u64, lambda: f64) -> f64 {
        let ll = lambda.ln();
        let k = self.k_max as i64;
        let mut acc = self.tail.ln_weighted_tail(self.k_max, lambda);
        for i in -k..=k {
            let a = i.unsigned_abs();
            if a > cutoff {
                acc = log_add(acc, self.coefficients[(i + k) as usize].ln_abs + a as f64 * ll);
            }
        }
        acc
    }

    /// `ln sup_{|k| > c} λ^{|k|}|c_k|` over stored and certified coefficients.
    pub fn ln_weighted_sup_beyond(&self, cutoff: u64, lambda: f64) -> f64 {
        let ll = lambda.ln();
        let k = self.k_max as i64;
        let mut best = self.tail.ln_weighted_sup(self.k_max, lambda);
        for i in -k..=k {
            let a = i.unsigned_abs();
            if a > cutoff {
                best = best.max(self.coefficients[(i + k) as usize].ln_abs + a as f64 * ll);
            }
        }
        best
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(["k", "log_abs", "phase"])?;
        let k = self.k_max as i64;
        for (i, c) in self.coefficients.iter().enumerate() {
            wtr.write_record([(i as i64 - k).to_string(), format!("{}", c.ln_abs), format!("{}", c.arg)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads `k, log_abs, phase` rows; missing indices inside the range are zero.
    pub fn read_csv<P: AsRef<Path>>(path: P, tail: TailCertificate) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            k: i64,
            log_abs: f64,
            phase: f64,
        }
        let mut rdr = csv::Reader::from_path(path)?;
        let mut rows = Vec::new();
        for r in rdr.deserialize::<Row>() {
            rows.push(r?);
        }
        let k_max = rows.iter().map(|r| r.k.unsigned_abs()).max().unwrap_or(0);
        let mut c = vec![LogComplex::zero(); 2 * k_max as usize + 1];
        for r in rows {
            let arg = if r.log_abs == f64::NEG_INFINITY { 0.0 } else { wrap_angle(r.phase) };
            c[(r.k + k_max as i64) as usize] = LogComplex::from_polar_log(r.log_abs, arg);
        }
        Self::from_coefficients(c, tail)
    }
}

/// Coefficientwise product over the common stored range.
pub fn star_product(a: &FourierSeq, b: &FourierSeq) -> FourierSeq {
    let k_max = a.k_max.min(b.k_max);
    let (ka, kb) = (a.k_max as i64, b.k_max as i64);
    let k = k_max as i64;
    let coefficients =
        (-k..=k).map(|i| a.coefficients[(i + ka) as usize].mul(&b.coefficients[(i + kb) as usize])).collect();
    let exact = |s: &FourierSeq| s.tail == TailCertificate::Exact && s.k_max <= k_max;
    let tail = if exact(a) || exact(b) {
        TailCertificate::Exact
    } else {
        match (a.tail, b.tail) {
            (
                TailCertificate::Decay { ln_c: ca, beta: ba, power: pa },
                TailCertificate::Decay { ln_c: cb, beta: bb, power: pb },
            ) if pa == pb => TailCertificate::Decay { ln_c: ca + cb, beta: ba + bb, power: pa },
            _ => TailCertificate::None,
        }
    };
    FourierSeq { k_max, coefficients, generator: None, tail }
}

/// Coefficients of `ψ_n(z) = Σ_{|k| <= floor(1/r(n))} z^k`.
pub fn partial_sum_projector(n: u64, w: &WeightSequence<f64>) -> FourierSeq {
    let c = w.cutoff(n);
    FourierSeq {
        k_max: c,
        coefficients: vec![LogComplex::one(); 2 * c as usize + 1],
        generator: None,
        tail: TailCertificate::Exact,
    }
}

/// `c ∗ ψ_n`: the Fourier partial sum of order `floor(1/r(n))`.
pub fn project_partial_sum(c: &FourierSeq, n: u64, w: &WeightSequence<f64>) -> Result<FourierSeq> {
    let cutoff = w.cutoff(n);
    if cutoff > c.k_max {
        return Err(Error::TruncationExceedsK { cutoff, k: c.k_max });
    }
    c.truncated(cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_reproduces_stored_values() {
        let s = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: -0.5, p: 2.0 }, 50);
        assert!(s.generator_matches());
        assert_eq!(s.ln_abs(3), -4.5);
        assert_eq!(s.ln_abs(-3), -4.5);
        assert_eq!(s.extended(80).unwrap().ln_abs(70), -0.5 * 4900.0);
        let huge = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: 1.0, p: 2.0 }, 1000);
        assert_eq!(huge.ln_abs(1000), 1e6);
    }

    #[test]
    fn one_sided_carries_sign() {
        let s = FourierSeq::from_generator(CoeffGenerator::OneSided { ratio: -1.0 / 3.0 }, 4);
        assert_eq!(s.get(-1).unwrap(), LogComplex::zero());
        let c1 = s.get(1).unwrap().to_complex();
        assert!((c1.re + 1.0 / 3.0).abs() < 1e-15 && c1.im.abs() < 1e-15);
        assert!((s.get(2).unwrap().to_complex().re - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn projector_is_idempotent_and_matches_truncation() {
        let w = WeightSequence::new(2.0).unwrap();
        let psi = partial_sum_projector(9, &w);
        assert_eq!(psi.k_max(), 3);
        assert_eq!(star_product(&psi, &psi), psi);
        let f = FourierSeq::from_generator(CoeffGenerator::ExpPower { a: -0.3, p: 1.0 }, 20);
        assert_eq!(project_partial_sum(&f, 9, &w).unwrap(), star_product(&f, &psi));
        assert!(matches!(project_partial_sum(&f, 1000, &w), Err(Error::TruncationExceedsK { cutoff: 31, k: 20 })));
    }

    #[test]
    fn monomial_star_product() {
        let e1 = FourierSeq::from_generator(CoeffGenerator::Monomial { index: 1 }, 4);
        let p = star_product(&e1, &e1);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.get(1), Some(LogComplex::one()));
        assert_eq!(p.get(0), Some(LogComplex::zero()));
    }

    #[test]
    fn geometric_tail_bounds() {
        let t = TailCertificate::Decay { ln_c: 0.0, beta: 3f64.ln(), power: 1.0 };
        // Σ_{|k|>K} (2/3)^{|k|} = 2 (2/3)^{K+1} / (1/3)
        let want = (6.0 * (2.0f64 / 3.0).powi(11)).ln();
        assert!((t.ln_weighted_tail(10, 2.0) - want).abs() < 1e-12);
        assert_eq!(t.ln_weighted_tail(10, 3.5), f64::INFINITY);
        assert!((t.ln_weighted_sup(10, 2.0) - 11.0 * (2.0f64 / 3.0).ln()).abs() < 1e-12);
        let g = TailCertificate::Decay { ln_c: 0.0, beta: 2f64.ln(), power: 2.0 };
        // 2^k 2^{−k²} peaks at k = 1/2, so the bound is taken at K+1
        assert!((g.ln_weighted_sup(3, 2.0) - (4.0 - 16.0) * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let s = FourierSeq::from_generator(CoeffGenerator::OneSided { ratio: -0.5 }, 6);
        s.write_csv(&p).unwrap();
        let back = FourierSeq::read_csv(&p, s.tail()).unwrap();
        assert_eq!(back.coefficients(), s.coefficients());
        assert_eq!(back.k_max(), 6);
    }
}
