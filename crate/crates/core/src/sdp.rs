//! PPT-relaxed state discrimination.
//!
//! Primal: maximize `sum_i <C_i, Pi_i>` with `C_i = p_i rho_i`, subject to
//! `sum_i Pi_i = I`, `Pi_i >= 0` and `Pi_i^{T_B} >= 0`.
//! Dual: minimize `Tr Y` subject to `Y - C_i - Q_i^{T_B} >= 0`, `Q_i >= 0`.
//!
//! The solver is ADMM on the splitting `Pi_i = Z_i`, `Pi_i^{T_B} = W_i` with
//! `Z, W` in the PSD cone and `Pi` in the affine completeness set. Every
//! reported value is bracketed: the lower end is the objective of a strictly
//! feasible repaired POVM, the upper end is `Tr Y` of a dual point made
//! feasible by an identity shift. Iteration stops when the bracket is below
//! the requested tolerance.

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{QpvError, Result};
use crate::protocols::{exact_hypotheses, ProtocolSpec};
use crate::qcore::rational::{format_rational, ratio, rational_to_f64};
use crate::qcore::{DensityMatrix, Operator, OperatorJson, RationalMatrix};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const MAX_ITERATIONS: usize = 200_000;
pub const PRIMAL_FEASIBILITY_TOL: f64 = 1e-7;
pub const DUAL_FEASIBILITY_TOL: f64 = 1e-9;

/// Hypotheses with priors and the A/B cut.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    name: String,
    dims: Vec<usize>,
    b_side: Vec<usize>,
    priors: Vec<f64>,
    states: Vec<DensityMatrix>,
    labels: Vec<String>,
    exact: Option<Vec<(BigRational, RationalMatrix)>>,
}

impl SdpProblem {
    pub fn new(name: &str, hypotheses: Vec<(f64, DensityMatrix)>, b_side: Vec<usize>) -> Result<Self> {
        let first = hypotheses
            .first()
            .ok_or_else(|| QpvError::InvalidArgument("no hypotheses".into()))?;
        let dims = first.1.dims().to_vec();
        for (_, s) in &hypotheses {
            first.1.check_same_dims(s)?;
        }
        if let Some(&bad) = b_side.iter().find(|&&b| b >= dims.len()) {
            return Err(QpvError::IndexOutOfRange {
                index: bad,
                factors: dims.len(),
            });
        }
        let total: f64 = hypotheses.iter().map(|h| h.0).sum();
        if (total - 1.0).abs() > 1e-12 || hypotheses.iter().any(|h| h.0 < 0.0) {
            return Err(QpvError::InvalidArgument(format!("priors sum to {total}")));
        }
        Ok(Self {
            name: name.to_string(),
            dims,
            b_side,
            labels: (0..hypotheses.len()).map(|i| i.to_string()).collect(),
            priors: hypotheses.iter().map(|h| h.0).collect(),
            states: hypotheses.into_iter().map(|h| h.1).collect(),
            exact: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn b_side(&self) -> &[usize] {
        &self.b_side
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn exact(&self) -> Option<&[(BigRational, RationalMatrix)]> {
        self.exact.as_deref()
    }

    /// `p_i rho_i`.
    pub fn weighted(&self, i: usize) -> Operator {
        self.states[i].scale(self.priors[i])
    }

    /// `sum_i p_i rho_i`.
    pub fn average_state(&self) -> Operator {
        (0..self.len()).fold(Operator::zeros(&self.dims), |acc, i| &acc + &self.weighted(i))
    }

    /// Partial transpose on the B side of the cut.
    pub fn pt(&self, op: &Operator) -> Operator {
        op.partial_transpose_many(&self.b_side)
            .expect("cut was validated at construction")
    }
}

/// One hypothesis and one POVM element per label of a concrete protocol.
pub fn build(spec: &ProtocolSpec) -> Result<SdpProblem> {
    if spec.generic().is_some() {
        return Err(QpvError::AbstractProtocol(spec.name().to_string()));
    }
    let hyps = spec.hypotheses().iter().map(|h| (h.prior, h.state.clone())).collect();
    let mut p = SdpProblem::new(spec.name(), hyps, spec.b_side().to_vec())?;
    p.labels = spec.hypotheses().iter().map(|h| spec.labels()[h.label].clone()).collect();
    p.exact = exact_hypotheses(spec);
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    /// `max |sum Pi - I|`.
    pub completeness: f64,
    /// Largest negative eigenvalue magnitude of any `Pi_i`.
    pub psd: f64,
    /// Largest negative eigenvalue magnitude of any `Pi_i^{T_B}`.
    pub ppt: f64,
}

#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub y: Operator,
    pub q: Vec<Operator>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificateJson {
    pub y: OperatorJson,
    pub q: Vec<OperatorJson>,
}

impl DualCertificate {
    pub fn to_json(&self) -> DualCertificateJson {
        DualCertificateJson {
            y: self.y.to_json(),
            q: self.q.iter().map(Operator::to_json).collect(),
        }
    }

    pub fn from_json(j: &DualCertificateJson) -> Result<Self> {
        Ok(Self {
            y: Operator::from_json(&j.y)?,
            q: j.q.iter().map(Operator::from_json).collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct PrimalSolution {
    pub povm: Vec<Operator>,
    /// Objective of the returned (feasible) POVM.
    pub value: f64,
    /// Certified upper bound from the returned dual certificate.
    pub upper_bound: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub certificate: DualCertificate,
}

impl PrimalSolution {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.value
    }
}

/// Optional linear equality `sum_i <G_i, Pi_i> = a` on top of completeness.
struct ScalarConstraint {
    g: Vec<Option<Operator>>,
    rhs: f64,
}

struct Admm<'a> {
    problem: &'a SdpProblem,
    objective: Vec<Operator>,
    scalar: Option<ScalarConstraint>,
    interior: Vec<Operator>,
    /// Smallest eigenvalue of every interior element in both frames.
    margin: f64,
    tol: f64,
    max_iterations: usize,
}

struct Bracket {
    lower: f64,
    upper: f64,
    povm: Vec<Operator>,
    residuals: Residuals,
    certificate: DualCertificate,
    nu: f64,
}

fn min_eig(op: &Operator) -> Result<f64> {
    op.hermitian_part().min_eigenvalue()
}

impl Admm<'_> {
    fn identity(&self) -> Operator {
        Operator::identity(self.problem.dims())
    }

    /// Euclidean projection of `v` onto the affine constraint set.
    fn affine_project(&self, v: &[Operator]) -> Vec<Operator> {
        let m = v.len() as f64;
        let sum = v.iter().skip(1).fold(v[0].clone(), |acc, x| &acc + x);
        let excess = &self.identity() - &sum;
        match &self.scalar {
            None => {
                let w = excess.scale(1.0 / m);
                v.iter().map(|x| x + &w).collect()
            }
            Some(sc) => {
                // Pi_i = V_i + W + mu G_i with G_i in {G, 0}; all G equal.
                let g = sc.g.iter().flatten().next().expect("scalar constraint has weights");
                let k = sc.g.iter().filter(|x| x.is_some()).count() as f64;
                let gg = g.trace_product(g);
                let gv: f64 = v
                    .iter()
                    .zip(&sc.g)
                    .filter(|(_, gi)| gi.is_some())
                    .map(|(x, _)| g.trace_product(x))
                    .sum();
                let ge = g.trace_product(&excess);
                let mu = (sc.rhs - gv - k * ge / m) * m / (k * gg * (m - k));
                let w = (&excess - &g.scale(mu * k)).scale(1.0 / m);
                v.iter()
                    .zip(&sc.g)
                    .map(|(x, gi)| {
                        let y = x + &w;
                        match gi {
                            Some(_) => &y + &g.scale(mu),
                            None => y,
                        }
                    })
                    .collect()
            }
        }
    }

    fn objective_value(&self, povm: &[Operator]) -> f64 {
        povm.iter().zip(&self.objective).map(|(p, c)| c.trace_product(p)).sum()
    }

    /// Mixes toward the interior point until both cones are satisfied.
    fn repair(&self, pi: &[Operator]) -> Result<(Vec<Operator>, Residuals)> {
        let mut psd = 0.0f64;
        let mut ppt = 0.0f64;
        for p in pi {
            psd = psd.max(-min_eig(p)?);
            ppt = ppt.max(-min_eig(&self.problem.pt(p))?);
        }
        let sum = pi.iter().skip(1).fold(pi[0].clone(), |acc, x| &acc + x);
        let residuals = Residuals {
            completeness: sum.max_abs_diff(&self.identity()),
            psd: psd.max(0.0),
            ppt: ppt.max(0.0),
        };
        let eps = psd.max(ppt).max(0.0);
        if eps == 0.0 {
            return Ok((pi.to_vec(), residuals));
        }
        // A hair beyond the exact mixing weight absorbs rounding.
        let t = (eps / (eps + self.margin) * (1.0 + 1e-9)).min(1.0);
        let out = pi
            .iter()
            .zip(&self.interior)
            .map(|(p, q)| &p.scale(1.0 - t) + &q.scale(t))
            .collect();
        Ok((out, residuals))
    }

    /// Dual point from the scaled multipliers, shifted into feasibility.
    fn dual(&self, rho: f64, u1: &[Operator], u2: &[Operator]) -> Result<(DualCertificate, f64, f64)> {
        let m = u1.len();
        let q: Vec<Operator> = u2
            .iter()
            .map(|u| u.scale(-rho).hermitian_part().psd_projection())
            .collect::<Result<_>>()?;
        let tq: Vec<Operator> = q.iter().map(|x| self.problem.pt(x)).collect();
        let s1: Vec<Operator> = u1.iter().map(|u| u.scale(-rho)).collect();
        let mvals: Vec<Operator> = (0..m)
            .map(|i| &(&self.objective[i] + &s1[i]) + &tq[i])
            .collect();
        let mean = |xs: &[Operator]| xs.iter().skip(1).fold(xs[0].clone(), |a, x| &a + x).scale(1.0 / xs.len() as f64);
        let (mut y, nu) = match &self.scalar {
            None => (mean(&mvals).hermitian_part(), 0.0),
            Some(sc) => {
                // Least-squares fit M_i ~ Y + nu G_i.
                let zero = Operator::zeros(self.problem.dims());
                let gs: Vec<Operator> = sc.g.iter().map(|g| g.clone().unwrap_or_else(|| zero.clone())).collect();
                let mbar = mean(&mvals);
                let gbar = mean(&gs);
                let (mut num, mut den) = (0.0, 0.0);
                for i in 0..m {
                    let dg = &gs[i] - &gbar;
                    num += (&mvals[i] - &mbar).trace_product(&dg);
                    den += dg.trace_product(&dg);
                }
                let nu = if den > 0.0 { num / den } else { 0.0 };
                ((&mbar - &gbar.scale(nu)).hermitian_part(), nu)
            }
        };
        let mut shift = 0.0f64;
        for (i, tqi) in tq.iter().enumerate() {
            let mut slack = &(&y - &self.objective[i]) - tqi;
            if let Some(sc) = &self.scalar {
                if let Some(g) = &sc.g[i] {
                    slack = &slack + &g.scale(nu);
                }
            }
            shift = shift.max(-min_eig(&slack)?);
        }
        if shift > 0.0 {
            // Rounding margin so that the shifted point verifies.
            let t = shift * (1.0 + 1e-9) + 1e-15;
            y = &y + &self.identity().scale(t);
        }
        let rhs = self.scalar.as_ref().map_or(0.0, |s| s.rhs);
        let bound = y.trace().re + nu * rhs;
        Ok((DualCertificate { y, q }, bound, nu))
    }

    fn bracket(&self, pi: &[Operator], rho: f64, u1: &[Operator], u2: &[Operator]) -> Result<Bracket> {
        let (povm, residuals) = self.repair(pi)?;
        let lower = self.objective_value(&povm);
        let (certificate, upper, nu) = self.dual(rho, u1, u2)?;
        Ok(Bracket {
            lower,
            upper,
            povm,
            residuals,
            certificate,
            nu,
        })
    }

    fn run(&self) -> Result<(Bracket, usize)> {
        let m = self.objective.len();
        let mut pi = self.interior.clone();
        let mut z1 = pi.clone();
        let mut z2: Vec<Operator> = pi.iter().map(|p| self.problem.pt(p)).collect();
        let zero = Operator::zeros(self.problem.dims());
        let mut u1 = vec![zero.clone(); m];
        let mut u2 = vec![zero; m];
        let mut rho = 1.0;
        let check_every = 10;
        let mut last = None;
        for it in 1..=self.max_iterations {
            let v: Vec<Operator> = (0..m)
                .map(|i| {
                    let a1 = &z1[i] - &u1[i];
                    let a2 = self.problem.pt(&(&z2[i] - &u2[i]));
                    &(&a1 + &a2).scale(0.5) + &self.objective[i].scale(0.5 / rho)
                })
                .collect();
            pi = self.affine_project(&v);
            let (mut r2, mut s2) = (0.0, 0.0);
            for i in 0..m {
                let tpi = self.problem.pt(&pi[i]);
                let new_z1 = (&pi[i] + &u1[i]).psd_projection()?;
                let new_z2 = (&tpi + &u2[i]).psd_projection()?;
                let d1 = &pi[i] - &new_z1;
                let d2 = &tpi - &new_z2;
                r2 += d1.frobenius_norm().powi(2) + d2.frobenius_norm().powi(2);
                s2 += (&new_z1 - &z1[i]).frobenius_norm().powi(2) + (&new_z2 - &z2[i]).frobenius_norm().powi(2);
                u1[i] = &u1[i] + &d1;
                u2[i] = &u2[i] + &d2;
                z1[i] = new_z1;
                z2[i] = new_z2;
            }
            if it % check_every == 0 {
                let b = self.bracket(&pi, rho, &u1, &u2)?;
                if b.upper - b.lower <= self.tol {
                    return Ok((b, it));
                }
                last = Some(b);
                let (r, s) = (r2.sqrt(), rho * s2.sqrt());
                if r > 10.0 * s {
                    rho *= 2.0;
                    u1.iter_mut().chain(u2.iter_mut()).for_each(|u| *u = u.scale(0.5));
                } else if s > 10.0 * r {
                    rho *= 0.5;
                    u1.iter_mut().chain(u2.iter_mut()).for_each(|u| *u = u.scale(2.0));
                }
            }
        }
        let b = match last {
            Some(b) => b,
            None => self.bracket(&pi, rho, &u1, &u2)?,
        };
        Err(QpvError::SdpNotConverged {
            iterations: self.max_iterations,
            gap: b.upper - b.lower,
            psd: b.residuals.psd,
            ppt: b.residuals.ppt,
        })
    }
}

/// Solves the PPT discrimination problem to a certified gap of `tol`.
pub fn solve(p: &SdpProblem, tol: f64) -> Result<PrimalSolution> {
    solve_with_budget(p, tol, MAX_ITERATIONS)
}

pub fn solve_with_budget(p: &SdpProblem, tol: f64, max_iterations: usize) -> Result<PrimalSolution> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(QpvError::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let m = p.len();
    let id = Operator::identity(p.dims());
    let admm = Admm {
        problem: p,
        objective: (0..m).map(|i| p.weighted(i)).collect(),
        scalar: None,
        interior: vec![id.scale(1.0 / m as f64); m],
        margin: 1.0 / m as f64,
        tol,
        max_iterations,
    };
    let (b, iterations) = admm.run()?;
    Ok(PrimalSolution {
        povm: b.povm,
        value: b.lower,
        upper_bound: b.upper,
        residuals: b.residuals,
        iterations,
        certificate: b.certificate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimalCheck {
    pub feasible: bool,
    pub value: f64,
    pub residuals: Residuals,
}

/// Checks completeness, positivity and PPT of a candidate POVM at `1e-7`
/// and evaluates `sum_i p_i Tr[Pi_i rho_i]`.
pub fn verify_primal(p: &SdpProblem, povm: &[Operator]) -> Result<PrimalCheck> {
    if povm.len() != p.len() {
        return Err(QpvError::DimensionMismatch(format!(
            "{} POVM elements for {} hypotheses",
            povm.len(),
            p.len()
        )));
    }
    let id = Operator::identity(p.dims());
    let mut sum = Operator::zeros(p.dims());
    let (mut psd, mut ppt) = (0.0f64, 0.0f64);
    let mut value = 0.0;
    for (i, e) in povm.iter().enumerate() {
        e.check_same_dims(&id)?;
        sum = &sum + e;
        psd = psd.max(-min_eig(e)?);
        ppt = ppt.max(-min_eig(&p.pt(e))?);
        value += p.weighted(i).trace_product(e);
    }
    let residuals = Residuals {
        completeness: sum.max_abs_diff(&id),
        psd: psd.max(0.0),
        ppt: ppt.max(0.0),
    };
    let hermitian = povm.iter().all(|e| e.is_hermitian(PRIMAL_FEASIBILITY_TOL));
    let feasible = hermitian
        && residuals.completeness <= PRIMAL_FEASIBILITY_TOL
        && residuals.psd <= PRIMAL_FEASIBILITY_TOL
        && residuals.ppt <= PRIMAL_FEASIBILITY_TOL;
    Ok(PrimalCheck {
        feasible,
        value,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCheck {
    pub valid: bool,
    pub bound: f64,
    /// `lambda_min(Y - Q_i^{T_B} - p_i rho_i)` per hypothesis.
    pub constraint_min_eigenvalues: Vec<f64>,
    pub q_min_eigenvalues: Vec<f64>,
}

/// Floating-point dual check by eigenvalues at tolerance `1e-9`.
pub fn verify_dual(p: &SdpProblem, c: &DualCertificate) -> Result<DualCheck> {
    if c.q.len() != p.len() {
        return Err(QpvError::DimensionMismatch(format!(
            "{} Q matrices for {} hypotheses",
            c.q.len(),
            p.len()
        )));
    }
    let id = Operator::identity(p.dims());
    c.y.check_same_dims(&id)?;
    let mut cons = Vec::new();
    let mut qs = Vec::new();
    for (i, q) in c.q.iter().enumerate() {
        q.check_same_dims(&id)?;
        cons.push(min_eig(&(&(&c.y - &p.pt(q)) - &p.weighted(i)))?);
        qs.push(min_eig(q)?);
    }
    let hermitian = c.y.is_hermitian(1e-12) && c.q.iter().all(|q| q.is_hermitian(1e-12));
    let valid = hermitian && cons.iter().chain(&qs).all(|&l| l >= -DUAL_FEASIBILITY_TOL);
    Ok(DualCheck {
        valid,
        bound: c.y.trace().re,
        constraint_min_eigenvalues: cons,
        q_min_eigenvalues: qs,
    })
}

/// Dual certificate with exact rational entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCertificate {
    pub y: RationalMatrix,
    pub q: Vec<RationalMatrix>,
}

impl ExactCertificate {
    pub fn to_float(&self) -> DualCertificate {
        DualCertificate {
            y: self.y.to_operator(),
            q: self.q.iter().map(RationalMatrix::to_operator).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateCase {
    Single,
    TwoRound,
}

fn sym_antisym_exact() -> (RationalMatrix, RationalMatrix) {
    let rho0 = RationalMatrix::from_integers(
        &[&[2, 0, 0, 0], &[0, 1, 1, 0], &[0, 1, 1, 0], &[0, 0, 0, 2]],
        ratio(1, 6),
        &[2, 2],
    )
    .expect("4x4 table");
    let rho1 = RationalMatrix::from_integers(
        &[&[0, 0, 0, 0], &[0, 1, -1, 0], &[0, -1, 1, 0], &[0, 0, 0, 0]],
        ratio(1, 2),
        &[2, 2],
    )
    .expect("4x4 table");
    (rho0, rho1)
}

/// The closed-form optimal dual points of the single- and two-round
/// sym/antisym problems.
pub fn closed_form_certificates(which: CertificateCase) -> ExactCertificate {
    let (rho0, rho1) = sym_antisym_exact();
    match which {
        CertificateCase::Single => {
            let y = RationalMatrix::from_integers(
                &[&[2, 0, 0, 0], &[0, 3, -1, 0], &[0, -1, 3, 0], &[0, 0, 0, 2]],
                ratio(1, 12),
                &[2, 2],
            )
            .expect("4x4 table");
            let q1 = RationalMatrix::from_integers(
                &[&[1, 0, 0, 1], &[0, 0, 0, 0], &[0, 0, 0, 0], &[1, 0, 0, 1]],
                ratio(1, 6),
                &[2, 2],
            )
            .expect("4x4 table");
            ExactCertificate {
                y,
                q: vec![RationalMatrix::zeros(&[2, 2]), q1],
            }
        }
        CertificateCase::TwoRound => {
            let r00 = rho0.kron(&rho0);
            let r11 = rho1.kron(&rho1);
            let y = r00
                .scale(&ratio(9, 18))
                .add(&r11.scale(&ratio(8, 18)))
                .expect("same dims");
            let t0 = rho0.partial_transpose_many(&[1]).expect("two factors").scale(&ratio(3, 1));
            let t1 = rho1.partial_transpose_many(&[1]).expect("two factors");
            let q1 = t0.kron(&t0).sub(&t1.kron(&t1)).expect("same dims").scale(&ratio(1, 18));
            ExactCertificate {
                y,
                q: vec![RationalMatrix::zeros(&[2, 2, 2, 2]), q1],
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDualCheck {
    pub valid: bool,
    pub bound: BigRational,
    pub constraints_psd: Vec<bool>,
    pub q_psd: Vec<bool>,
}

impl ExactDualCheck {
    pub fn bound_string(&self) -> String {
        format_rational(&self.bound)
    }

    pub fn bound_f64(&self) -> f64 {
        rational_to_f64(&self.bound)
    }
}

/// `Y - Q_i^{T_B} - p_i rho_i` in exact arithmetic.
pub fn exact_constraint(p: &SdpProblem, c: &ExactCertificate, i: usize) -> Result<RationalMatrix> {
    let exact = p
        .exact()
        .ok_or_else(|| QpvError::InvalidArgument(format!("problem '{}' has no exact data", p.name())))?;
    let (prior, state) = &exact[i];
    c.y.sub(&c.q[i].partial_transpose_many(p.b_side())?)?
        .sub(&state.scale(prior))
}

/// Exact dual check: every constraint and every `Q_i` PSD by rational
/// elimination; the bound is `Tr Y` as a fraction.
pub fn verify_dual_exact(p: &SdpProblem, c: &ExactCertificate) -> Result<ExactDualCheck> {
    if c.q.len() != p.len() {
        return Err(QpvError::DimensionMismatch(format!(
            "{} Q matrices for {} hypotheses",
            c.q.len(),
            p.len()
        )));
    }
    if c.y.dims() != p.dims() {
        return Err(QpvError::DimensionMismatch(format!("{:?} vs {:?}", c.y.dims(), p.dims())));
    }
    let mut constraints_psd = Vec::new();
    for i in 0..p.len() {
        constraints_psd.push(exact_constraint(p, c, i)?.is_psd());
    }
    let q_psd: Vec<bool> = c.q.iter().map(RationalMatrix::is_psd).collect();
    Ok(ExactDualCheck {
        valid: c.y.is_symmetric() && constraints_psd.iter().chain(&q_psd).all(|&b| b),
        bound: c.y.trace(),
        constraints_psd,
        q_psd,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossPoint {
    /// Conclusive probability enforced at this grid point.
    pub a: f64,
    pub value: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossSolution {
    pub eta: f64,
    /// `max_a value(a) / a` over the grid, from feasible POVMs.
    pub conditional_value: f64,
    /// `max_a upper(a) / a`: a certified bound on the conditional value at
    /// every grid point.
    pub conditional_upper: f64,
    pub best_a: f64,
    pub grid: Vec<LossPoint>,
    /// Always true: the fixed-conclusive-rate sweep is our own formulation.
    pub reconstruction: bool,
}

/// Grid of conclusive probabilities swept for a given `eta`.
pub fn loss_grid(eta: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..=4).map(|j| eta + (1.0 - eta) * j as f64 / 4.0).collect();
    g.dedup();
    g
}

fn solve_fixed_conclusive(p: &SdpProblem, a: f64, tol: f64) -> Result<LossPoint> {
    if a >= 1.0 - 1e-12 {
        let s = solve(p, tol)?;
        return Ok(LossPoint {
            a: 1.0,
            value: s.value,
            upper_bound: s.upper_bound,
        });
    }
    let m = p.len();
    let id = Operator::identity(p.dims());
    let avg = p.average_state();
    let mut objective: Vec<Operator> = (0..m).map(|i| p.weighted(i)).collect();
    objective.push(Operator::zeros(p.dims()));
    let mut g: Vec<Option<Operator>> = vec![Some(avg); m];
    g.push(None);
    let mut interior = vec![id.scale(a / m as f64); m];
    interior.push(id.scale(1.0 - a));
    let admm = Admm {
        problem: p,
        objective,
        scalar: Some(ScalarConstraint { g, rhs: a }),
        interior,
        margin: (a / m as f64).min(1.0 - a),
        tol,
        max_iterations: MAX_ITERATIONS,
    };
    let (b, _) = admm.run()?;
    let _ = b.nu;
    Ok(LossPoint {
        a,
        value: b.lower,
        upper_bound: b.upper,
    })
}

/// Conditional PPT success when the attackers may declare loss but must
/// answer on a fraction at least `eta` of rounds.
pub fn solve_with_loss(p: &SdpProblem, eta: f64, tol: f64) -> Result<LossSolution> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(QpvError::InvalidArgument(format!("eta {eta} outside (0, 1]")));
    }
    let mut grid = Vec::new();
    for a in loss_grid(eta) {
        grid.push(solve_fixed_conclusive(p, a, tol * a)?);
    }
    let best = grid
        .iter()
        .max_by(|x, y| (x.value / x.a).total_cmp(&(y.value / y.a)))
        .expect("non-empty grid");
    let conditional_upper = grid.iter().map(|x| x.upper_bound / x.a).fold(f64::MIN, f64::max);
    Ok(LossSolution {
        eta,
        conditional_value: best.value / best.a,
        conditional_upper,
        best_a: best.a,
        grid,
        reconstruction: true,
    })
}

/// Exact `Tr Y` bound of a certificate, or zero for an empty matrix.
pub fn exact_trace(c: &ExactCertificate) -> BigRational {
    if c.y.dims().is_empty() {
        BigRational::zero()
    } else {
        c.y.trace()
    }
}
