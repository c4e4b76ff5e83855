//! One verification trial: every identity from the family equation to the
//! terminal quadrics, for a single `(mu, omega)`.

use alloc::format;
use alloc::vec::Vec;

use crate::cert::{overall, Check, Status};
use crate::deformation::{basis_report, build_pullbacks, compute_scalars};
use crate::dynamics::composite_identity;
use crate::error::CurveError;
use crate::gf2m::FieldElement;
use crate::verschiebung::{
    base_point_argument, compute_q, compute_r, coordinate_change_checks, kummer_cross_check,
    kummer_theta_check, pullback_identity, terminal_certificate, terminal_certificate_symbolic,
    QuadricSystem,
};

#[derive(Clone, Debug)]
pub struct TrialReport {
    pub mu: FieldElement,
    pub omega: FieldElement,
    pub precision: i64,
    /// The other values of omega used for the independence check.
    pub omega_variants: Vec<FieldElement>,
    pub checks: Vec<Check>,
}

impl TrialReport {
    pub fn status(&self) -> Status {
        overall(&self.checks)
    }
}

/// Up to two further admissible values of omega, derived from `omega`.
pub fn omega_variants(omega: FieldElement) -> Vec<FieldElement> {
    let f = omega.field();
    let one = f.one();
    let mut out: Vec<FieldElement> = Vec::new();
    let candidates = [omega + one, omega.square(), omega.inv().unwrap_or(one), omega.square() + one];
    for c in candidates {
        if c.is_zero() || c.is_one() || c == omega || out.contains(&c) {
            continue;
        }
        out.push(c);
        if out.len() == 2 {
            break;
        }
    }
    out
}

fn leading_forms(
    mu: FieldElement,
    omega: FieldElement,
    precision: i64,
) -> Result<(QuadricSystem<FieldElement>, Vec<Check>), CurveError> {
    let sc = compute_scalars(mu, omega, precision)?;
    let basis = basis_report(&sc.scalars)?;
    let q = compute_q(&sc.scalars, &basis.matrix)?;
    let r = compute_r(&sc.scalars, &q.q, &basis.inverse)?;
    let mut checks = sc.checks;
    checks.extend(basis.checks);
    checks.extend(q.checks);
    checks.extend(r.checks);
    Ok((r.leads, checks))
}

pub fn run_trial(
    mu: FieldElement,
    omega: FieldElement,
    precision: i64,
) -> Result<TrialReport, CurveError> {
    let sc = compute_scalars(mu, omega, precision)?;
    let s = &sc.scalars;
    let mut checks = sc.checks.clone();
    checks.extend(build_pullbacks(s)?.checks);
    let basis = basis_report(s)?;
    checks.extend(basis.checks.iter().cloned());
    let q = compute_q(s, &basis.matrix)?;
    checks.extend(q.checks);
    let r = compute_r(s, &q.q, &basis.inverse)?;
    checks.extend(r.checks);
    checks.push(terminal_certificate(&r.leads, mu));

    let variants = omega_variants(omega);
    let mut same = true;
    let mut worst = Status::Certified;
    for &w in &variants {
        let (leads, sub) = leading_forms(mu, w, precision)?;
        same &= leads == r.leads;
        worst = worst.max(overall(&sub));
    }
    let status = if !same {
        Status::Failed
    } else if worst >= Status::Inconclusive {
        worst
    } else {
        Status::Certified
    };
    let shown: Vec<_> = variants.iter().map(|w| format!("{w}")).collect();
    checks.push(Check::new(
        "leading_forms_omega_independent",
        status,
        format!("compared with omega in {shown:?}"),
    ));
    checks.push(kummer_theta_check(s, &basis.matrix));
    checks.extend(coordinate_change_checks(mu));
    Ok(TrialReport {
        mu,
        omega,
        precision,
        omega_variants: variants,
        checks,
    })
}

/// Identities over GF(2)[mu, ...] that do not depend on a trial.
pub fn symbolic_checks() -> Vec<Check> {
    alloc::vec![
        terminal_certificate_symbolic(),
        base_point_argument(),
        kummer_cross_check(),
        pullback_identity(),
        composite_identity(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2m::FieldParams;

    #[test]
    fn variants_are_admissible() {
        let f = FieldParams::new(2).unwrap();
        let w = f.element(2).unwrap();
        let v = omega_variants(w);
        assert_eq!(v, alloc::vec![f.element(3).unwrap()]);
        let g = FieldParams::new(16).unwrap();
        let v = omega_variants(g.element(0x1234).unwrap());
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn full_trial() {
        let f = FieldParams::new(16).unwrap();
        let r = run_trial(f.element(0x8001).unwrap(), f.element(0x77).unwrap(), 128).unwrap();
        assert_eq!(r.status(), Status::Discrepancy, "{:?}", r.checks);
        let d: Vec<_> = r.checks.iter().filter(|c| c.status == Status::Discrepancy).map(|c| c.name.as_str()).collect();
        assert_eq!(d, ["sqrt_inv_bc_displayed", "r_3_remainder_s2", "r_inf_remainder_s2"]);
    }

    #[test]
    fn low_precision_is_inconclusive() {
        let f = FieldParams::new(16).unwrap();
        let r = run_trial(f.element(0x5).unwrap(), f.element(0x6).unwrap(), 40).unwrap();
        assert_eq!(r.status(), Status::Inconclusive);
    }

    #[test]
    fn symbolic() {
        assert!(symbolic_checks().iter().all(|c| c.is_certified()));
    }
}
