//! Characteristic triplets, the characteristic exponent, and the regularity and
//! drift classifications.
//!
//! Sign convention: `E[exp(iλX_t)] = exp(-t ψ(λ))` with
//! `ψ(λ) = iaλ + bλ² + ∫ π(dr) (1 - e^{iλr} + iλr 1{|r|<1})`.
//! So `a` enters the paths with a minus sign: a path with `a = -1`, `b = 0` and no
//! jumps is the line `X_t = t`.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Exp1, StandardNormal};

use crate::quad::{self, QuadFailure};

const QUAD_TOL: f64 = 1e-9;
/// Means smaller than this are reported as zero by [`drift_classification`].
pub const MEAN_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LevyError {
    #[error("invalid triplet: {0}")]
    Invalid(String),
    #[error("quadrature did not converge on [{}, {}] (estimate {}, error {})", .0.lo, .0.hi, .0.estimate, .0.error)]
    Quadrature(QuadFailure),
}

impl From<QuadFailure> for LevyError {
    fn from(q: QuadFailure) -> Self {
        LevyError::Quadrature(q)
    }
}

fn invalid(msg: &str) -> LevyError {
    LevyError::Invalid(String::from(msg))
}

/// Probability law of the jump sizes of a compound Poisson component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpLaw {
    Dirac {
        at: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Kou's law: with probability `p_up` an Exp(`rate_up`) jump up, otherwise an
    /// Exp(`rate_down`) jump down.
    DoubleExponential {
        p_up: f64,
        rate_up: f64,
        rate_down: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
}

/// A piece of a jump law: either an atom or a density on an interval.
enum Piece {
    Atom(f64, f64),
    Density(f64, f64),
}

impl JumpLaw {
    fn validate(&self) -> Result<(), LevyError> {
        let ok = match *self {
            JumpLaw::Dirac { at } => at.is_finite() && at != 0.0,
            JumpLaw::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            JumpLaw::DoubleExponential { p_up, rate_up, rate_down } => {
                (0.0..=1.0).contains(&p_up)
                    && rate_up.is_finite()
                    && rate_down.is_finite()
                    && rate_up > 0.0
                    && rate_down > 0.0
            }
            JumpLaw::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("jump law parameters out of range or law charges 0"))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::Dirac { at } => at,
            JumpLaw::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            JumpLaw::DoubleExponential { p_up, rate_up, rate_down } => {
                let u: f64 = rng.random();
                let e: f64 = Exp1.sample(rng);
                if u < p_up {
                    e / rate_up
                } else {
                    -e / rate_down
                }
            }
            JumpLaw::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }

    /// P(J > r).
    pub fn tail_above(&self, r: f64) -> f64 {
        match *self {
            JumpLaw::Dirac { at } => {
                if at > r {
                    1.0
                } else {
                    0.0
                }
            }
            JumpLaw::Normal { mean, sd } => crate::math::normal_cdf((mean - r) / sd),
            JumpLaw::DoubleExponential { p_up, rate_up, rate_down } => {
                if r >= 0.0 {
                    p_up * libm::exp(-rate_up * r)
                } else {
                    1.0 - (1.0 - p_up) * libm::exp(rate_down * r)
                }
            }
            JumpLaw::Uniform { low, high } => ((high - r) / (high - low)).clamp(0.0, 1.0),
        }
    }

    /// Closed-form characteristic function E[exp(iλJ)].
    pub fn char_fn(&self, lam: f64) -> Complex64 {
        let i = Complex64::i();
        match *self {
            JumpLaw::Dirac { at } => (i * lam * at).exp(),
            JumpLaw::Normal { mean, sd } => (i * lam * mean).exp() * libm::exp(-0.5 * sd * sd * lam * lam),
            JumpLaw::DoubleExponential { p_up, rate_up, rate_down } => {
                p_up * rate_up / (rate_up - i * lam) + (1.0 - p_up) * rate_down / (rate_down + i * lam)
            }
            JumpLaw::Uniform { low, high } => {
                if lam == 0.0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    ((i * lam * high).exp() - (i * lam * low).exp()) / (i * lam * (high - low))
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::Dirac { at } => at,
            JumpLaw::Normal { mean, .. } => mean,
            JumpLaw::DoubleExponential { p_up, rate_up, rate_down } => p_up / rate_up - (1.0 - p_up) / rate_down,
            JumpLaw::Uniform { low, high } => 0.5 * (low + high),
        }
    }

    fn pieces(&self) -> Vec<Piece> {
        match *self {
            JumpLaw::Dirac { at } => alloc::vec![Piece::Atom(at, 1.0)],
            JumpLaw::Normal { mean, sd } => alloc::vec![Piece::Density(mean - 12.0 * sd, mean + 12.0 * sd)],
            JumpLaw::DoubleExponential { p_up, rate_up, rate_down } => {
                let mut v = Vec::new();
                if p_up > 0.0 {
                    v.push(Piece::Density(0.0, 45.0 / rate_up));
                }
                if p_up < 1.0 {
                    v.push(Piece::Density(-45.0 / rate_down, 0.0));
                }
                v
            }
            JumpLaw::Uniform { low, high } => alloc::vec![Piece::Density(low, high)],
        }
    }

    fn density(&self, r: f64) -> f64 {
        match *self {
            JumpLaw::Dirac { .. } => 0.0,
            JumpLaw::Normal { mean, sd } => crate::math::normal_pdf((r - mean) / sd) / sd,
            JumpLaw::DoubleExponential { p_up, rate_up, rate_down } => {
                if r >= 0.0 {
                    p_up * rate_up * libm::exp(-rate_up * r)
                } else {
                    (1.0 - p_up) * rate_down * libm::exp(rate_down * r)
                }
            }
            JumpLaw::Uniform { low, high } => {
                if r >= low && r <= high {
                    1.0 / (high - low)
                } else {
                    0.0
                }
            }
        }
    }

    /// E[g(J)] by exact atoms and adaptive quadrature of the density, splitting at
    /// the discontinuities of the compensator indicator.
    fn expect<G: FnMut(f64) -> f64>(&self, mut g: G, tol: f64) -> Result<f64, QuadFailure> {
        let mut total = 0.0;
        for piece in self.pieces() {
            match piece {
                Piece::Atom(r, p) => total += p * g(r),
                Piece::Density(lo, hi) => {
                    let mut cuts: Vec<f64> = alloc::vec![lo];
                    for c in [-1.0, 0.0, 1.0] {
                        if c > lo && c < hi {
                            cuts.push(c);
                        }
                    }
                    cuts.push(hi);
                    for w in cuts.windows(2) {
                        total += quad::integrate(|r| self.density(r) * g(r), w[0], w[1], tol / 4.0)?;
                    }
                }
            }
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpSpec {
    None,
    CompoundPoisson {
        rate: f64,
        law: JumpLaw,
    },
    /// Stable Lévy density `c± |r|^{-1-α}` with `c± = (1 ± skew)/2`, restricted to
    /// `|r| ≥ eps`. The mass below `eps` is replaced by a Gaussian with the same variance.
    TruncatedStable {
        alpha: f64,
        skew: f64,
        eps: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    SatisfiesA,
    FailsA,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftClass {
    DriftsUp,
    DriftsDown,
    Oscillates,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyTriplet {
    drift_a: f64,
    gaussian_b: f64,
    jumps: JumpSpec,
}

impl LevyTriplet {
    pub fn new(drift_a: f64, gaussian_b: f64, jumps: JumpSpec) -> Result<Self, LevyError> {
        if !drift_a.is_finite() {
            return Err(invalid("drift must be finite"));
        }
        if !(gaussian_b.is_finite() && gaussian_b >= 0.0) {
            return Err(invalid("gaussian coefficient must be finite and >= 0"));
        }
        match jumps {
            JumpSpec::None => {}
            JumpSpec::CompoundPoisson { rate, law } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(invalid("compound Poisson rate must be > 0"));
                }
                law.validate()?;
            }
            JumpSpec::TruncatedStable { alpha, skew, eps } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(invalid("stable index must lie in (0, 2)"));
                }
                if !(-1.0..=1.0).contains(&skew) {
                    return Err(invalid("skewness must lie in [-1, 1]"));
                }
                if !(eps.is_finite() && eps > 0.0) {
                    return Err(invalid("inner cutoff must be > 0"));
                }
            }
        }
        Ok(LevyTriplet { drift_a, gaussian_b, jumps })
    }

    /// Standard Brownian motion scaled so that `Var X_1 = 2b`.
    pub fn brownian(gaussian_b: f64) -> Self {
        Self::new(0.0, gaussian_b, JumpSpec::None).expect("valid Brownian triplet")
    }

    pub fn drift_a(&self) -> f64 {
        self.drift_a
    }

    pub fn gaussian_b(&self) -> f64 {
        self.gaussian_b
    }

    pub fn jumps(&self) -> JumpSpec {
        self.jumps
    }

    /// Gaussian coefficient actually simulated, including the small-jump substitute.
    pub fn effective_gaussian_b(&self) -> f64 {
        match self.jumps {
            JumpSpec::TruncatedStable { alpha, eps, .. } => {
                self.gaussian_b + 0.5 * libm::pow(eps, 2.0 - alpha) / (2.0 - alpha)
            }
            _ => self.gaussian_b,
        }
    }

    /// Total intensity of the simulated (exactly sampled) jumps.
    pub fn jump_rate(&self) -> f64 {
        match self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::CompoundPoisson { rate, .. } => rate,
            JumpSpec::TruncatedStable { alpha, eps, .. } => libm::pow(eps, -alpha) / alpha,
        }
    }

    /// ∫ r 1{|r| < 1} π(dr) over the simulated jumps.
    fn small_jump_mean(&self) -> Result<f64, LevyError> {
        Ok(match self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::CompoundPoisson { rate, law } => {
                rate * law.expect(|r| if r.abs() < 1.0 { r } else { 0.0 }, QUAD_TOL)?
            }
            JumpSpec::TruncatedStable { alpha, skew, eps } => {
                if eps >= 1.0 {
                    0.0
                } else if (alpha - 1.0).abs() < 1e-12 {
                    -skew * libm::log(eps)
                } else {
                    skew * (1.0 - libm::pow(eps, 1.0 - alpha)) / (1.0 - alpha)
                }
            }
        })
    }

    /// Deterministic velocity of the simulated path between jumps.
    pub fn path_velocity(&self) -> Result<f64, LevyError> {
        Ok(-self.drift_a - self.small_jump_mean()?)
    }

    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::CompoundPoisson { law, .. } => law.sample(rng),
            JumpSpec::TruncatedStable { alpha, skew, eps } => {
                let u: f64 = rng.random();
                let v: f64 = 1.0 - rng.random::<f64>();
                let size = eps * libm::pow(v, -1.0 / alpha);
                if u < 0.5 * (1.0 + skew) {
                    size
                } else {
                    -size
                }
            }
        }
    }

    /// π((0, ∞)) for the simulated jumps.
    pub fn positive_jump_mass(&self) -> f64 {
        match self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::CompoundPoisson { rate, law } => rate * law.tail_above(0.0),
            JumpSpec::TruncatedStable { alpha, skew, eps } => 0.5 * (1.0 + skew) * libm::pow(eps, -alpha) / alpha,
        }
    }

    /// π((r, ∞)) for r > 0.
    pub fn positive_tail(&self, r: f64) -> f64 {
        match self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::CompoundPoisson { rate, law } => rate * law.tail_above(r),
            JumpSpec::TruncatedStable { alpha, skew, eps } => {
                0.5 * (1.0 + skew) * libm::pow(r.max(eps), -alpha) / alpha
            }
        }
    }

    /// Draws from π restricted to (0, ∞) and normalized.
    pub fn sample_positive_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        match self.jumps {
            JumpSpec::None => None,
            JumpSpec::CompoundPoisson { law, .. } => match law {
                JumpLaw::DoubleExponential { p_up, rate_up, .. } if p_up > 0.0 => {
                    Some(Exp::new(rate_up).ok()?.sample(rng))
                }
                _ => {
                    if law.tail_above(0.0) <= 0.0 {
                        return None;
                    }
                    (0..100_000).map(|_| law.sample(rng)).find(|&r| r > 0.0)
                }
            },
            JumpSpec::TruncatedStable { alpha, skew, eps } => {
                if skew <= -1.0 {
                    return None;
                }
                let v: f64 = 1.0 - rng.random::<f64>();
                Some(eps * libm::pow(v, -1.0 / alpha))
            }
        }
    }

    pub fn has_negative_jumps(&self) -> bool {
        match self.jumps {
            JumpSpec::None => false,
            JumpSpec::CompoundPoisson { law, .. } => law.tail_above(0.0) < 1.0,
            JumpSpec::TruncatedStable { skew, .. } => skew < 1.0,
        }
    }

    pub fn has_positive_jumps(&self) -> bool {
        self.positive_jump_mass() > 0.0
    }

    /// E[X_1], `None` when it is undefined.
    pub fn mean(&self) -> Result<Option<f64>, LevyError> {
        let big = match self.jumps {
            JumpSpec::None => 0.0,
            JumpSpec::CompoundPoisson { rate, law } => {
                rate * law.expect(|r| if r.abs() >= 1.0 { r } else { 0.0 }, QUAD_TOL)?
            }
            JumpSpec::TruncatedStable { alpha, skew, eps } => {
                if alpha <= 1.0 {
                    return Ok(None);
                }
                skew * libm::pow(eps.max(1.0), 1.0 - alpha) / (alpha - 1.0)
            }
        };
        Ok(Some(-self.drift_a + big))
    }
}

/// ψ(λ) for the simulated process (for truncated stable triplets this includes the
/// Gaussian substitute for the small jumps).
pub fn char_exponent(triplet: &LevyTriplet, lam: f64) -> Result<Complex64, LevyError> {
    if lam == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut psi = Complex64::new(triplet.gaussian_b * lam * lam, triplet.drift_a * lam);
    match triplet.jumps {
        JumpSpec::None => {}
        JumpSpec::CompoundPoisson { rate, law } => {
            let re = law.expect(|r| 1.0 - libm::cos(lam * r), QUAD_TOL)?;
            let im = law.expect(
                |r| {
                    let comp = if r.abs() < 1.0 { lam * r } else { 0.0 };
                    comp - libm::sin(lam * r)
                },
                QUAD_TOL,
            )?;
            psi += rate * Complex64::new(re, im);
        }
        JumpSpec::TruncatedStable { alpha, skew, eps } => {
            let var_small = libm::pow(eps, 2.0 - alpha) / (2.0 - alpha);
            psi += 0.5 * var_small * lam * lam;
            let j = stable_side(alpha, eps, lam.abs())?;
            let j = if lam > 0.0 { j } else { j.conj() };
            psi += 0.5 * (1.0 + skew) * j + 0.5 * (1.0 - skew) * j.conj();
        }
    }
    Ok(psi)
}

/// ∫_ε^∞ (1 - e^{iλr} + iλr 1{r<1}) r^{-1-α} dr for λ > 0.
fn stable_side(alpha: f64, eps: f64, lam: f64) -> Result<Complex64, LevyError> {
    let s = 1.0 + alpha;
    let big_r = (60.0 / lam).max(1.0).max(eps);
    let re_f = |r: f64| (1.0 - libm::cos(lam * r)) * libm::pow(r, -s);
    let im_f = |r: f64| {
        let comp = if r < 1.0 { lam * r } else { 0.0 };
        (comp - libm::sin(lam * r)) * libm::pow(r, -s)
    };
    let mut re = 0.0;
    let mut im = 0.0;
    // Geometric pieces keep the power singularity and the oscillation resolvable.
    let mut cuts: Vec<f64> = alloc::vec![eps];
    let mut c = eps;
    while c * 2.0 < big_r {
        c *= 2.0;
        if eps < 1.0 && c > 1.0 && cuts.last().is_some_and(|&l| l < 1.0) {
            cuts.push(1.0);
        }
        cuts.push(c);
    }
    if eps < 1.0 && cuts.last().is_some_and(|&l| l < 1.0) && big_r > 1.0 {
        cuts.push(1.0);
    }
    cuts.push(big_r);
    cuts.dedup();
    let share = QUAD_TOL / (2.0 * cuts.len() as f64);
    for w in cuts.windows(2) {
        re += quad::integrate(re_f, w[0], w[1], share)?;
        im += quad::integrate(im_f, w[0], w[1], share)?;
    }
    // Tail beyond R ≥ 1: ∫ r^{-s} dr - ∫ e^{iλr} r^{-s} dr, the latter by its
    // integration-by-parts expansion (λR ≥ 60).
    let i = Complex64::i();
    let mut tail_osc = Complex64::new(0.0, 0.0);
    let mut coef = 1.0;
    let mut ilam_pow = i * lam;
    for k in 0..14 {
        tail_osc -= coef * libm::pow(big_r, -s - k as f64) / ilam_pow;
        coef *= s + k as f64;
        ilam_pow *= i * lam;
    }
    tail_osc *= (i * lam * big_r).exp();
    let tail = Complex64::new(libm::pow(big_r, -alpha) / alpha, 0.0) - tail_osc;
    Ok(Complex64::new(re, im) + tail)
}

pub fn regularity_check(triplet: &LevyTriplet) -> Regularity {
    if triplet.gaussian_b > 0.0 {
        return Regularity::SatisfiesA;
    }
    match triplet.jumps {
        // Finite activity without a Gaussian part: the path is piecewise linear.
        JumpSpec::CompoundPoisson { .. } | JumpSpec::None => Regularity::FailsA,
        JumpSpec::TruncatedStable { .. } => Regularity::Undetermined,
    }
}

pub fn drift_classification(triplet: &LevyTriplet) -> DriftClass {
    match triplet.mean() {
        Ok(Some(m)) if m > MEAN_ZERO_TOL => DriftClass::DriftsUp,
        Ok(Some(m)) if m < -MEAN_ZERO_TOL => DriftClass::DriftsDown,
        Ok(Some(_)) => DriftClass::Oscillates,
        _ => DriftClass::Unknown,
    }
}
