//! Conservative closures of the averaged two-dimensional vorticity equation
//! `ζ_t + ψ_x ζ_y − ψ_y ζ_x = V[ψ]`, `ζ = ψ_xx + ψ_yy`.

use std::sync::Arc;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::families::verify_family_h;
use crate::jet::{euler, is_total_divergence, split_by_arbitrary_functions};
use crate::var::MultiIndex;

const T: usize = 0;
const X: usize = 1;
const Y: usize = 2;

/// `vars t x y; unknowns psi; funcs h(t) f(t) g(t)`.
pub fn vorticity_context() -> Arc<JetContext> {
    JetContext::parse("vars t x y; unknowns psi; funcs h(t) f(t) g(t)").expect("valid header")
}

fn check_context(ctx: &JetContext) -> Result<()> {
    if ctx.n_independent() != 3 || ctx.n_dependent() != 1 {
        return Err(Error::Precondition(
            "expected independent variables (t, x, y) and one unknown".into(),
        ));
    }
    Ok(())
}

fn psi(ctx: &Arc<JetContext>, vars: &[usize]) -> Expression {
    Expression::jet_of(ctx, 0, vars).expect("valid jet")
}

/// `ζ = ψ_xx + ψ_yy`.
pub fn zeta(ctx: &Arc<JetContext>) -> Result<Expression> {
    check_context(ctx)?;
    Ok(psi(ctx, &[X, X]) + psi(ctx, &[Y, Y]))
}

/// `ζ_t + ψ_x ζ_y − ψ_y ζ_x`, expanded.
pub fn vorticity_lhs(ctx: &Arc<JetContext>) -> Result<Expression> {
    let z = zeta(ctx)?;
    Ok(z.d(T) + psi(ctx, &[X]) * z.d(Y) - psi(ctx, &[Y]) * z.d(X))
}

/// The matrix `G` with `lhs = ± D_i(G^{ij} D_j ζ)`.
pub fn enstrophy_form_matrix(ctx: &Arc<JetContext>) -> Result<Vec<Vec<Expression>>> {
    check_context(ctx)?;
    let zero = Expression::zero(ctx);
    let y = Expression::independent(ctx, Y)?;
    let p = psi(ctx, &[]);
    Ok(vec![
        vec![zero.clone(), zero.clone(), y.clone()],
        vec![zero.clone(), zero.clone(), -&p],
        vec![-&y, p, zero],
    ])
}

/// Parameterization data `(P¹, P², P³)`, `(S¹, S², S³)`.
#[derive(Clone, Debug)]
pub struct ClosureData {
    pub p: [Expression; 3],
    pub s: [Expression; 3],
}

impl ClosureData {
    pub fn new(p: [Expression; 3], s: [Expression; 3]) -> Result<Self> {
        let mut probe = Expression::zero(p[0].context());
        for e in p.iter().chain(&s) {
            probe = probe.checked_add(&Expression::zero(e.context()))?;
        }
        check_context(probe.context())?;
        let ctx = probe.context().clone();
        Ok(ClosureData {
            p: p.map(|e| e.lift(&ctx)),
            s: s.map(|e| e.lift(&ctx)),
        })
    }

    pub fn zero(ctx: &Arc<JetContext>) -> Self {
        let z = Expression::zero(ctx);
        ClosureData {
            p: [z.clone(), z.clone(), z.clone()],
            s: [z.clone(), z.clone(), z],
        }
    }

    pub fn context(&self) -> &Arc<JetContext> {
        self.p[0].context()
    }
}

fn div(s: &[Expression; 3]) -> Expression {
    s[0].d(T) + s[1].d(X) + s[2].d(Y)
}

/// The closure
/// `V = D_x²(ψ_yy P² − ψ_xy P³) + D_x D_y(ψ_xx P³ − ψ_yy P¹) + D_y²(ψ_xy P¹ − ψ_xx P²)
///    + (D_x² + D_y²)(ζ Div S + 2S¹ζ_t + 2S²ζ_x + 2S³ζ_y)`.
pub fn build_v(data: &ClosureData) -> Result<Expression> {
    let ctx = data.context();
    check_context(ctx)?;
    let [p1, p2, p3] = &data.p;
    let [s1, s2, s3] = &data.s;
    let (pxx, pxy, pyy) = (psi(ctx, &[X, X]), psi(ctx, &[X, Y]), psi(ctx, &[Y, Y]));
    let f11 = &pyy * p2 - &pxy * p3;
    let f12 = &pxx * p3 - &pyy * p1;
    let f22 = &pxy * p1 - &pxx * p2;
    let z = zeta(ctx)?;
    let r = &z * &div(&data.s) + (s1 * &z.d(T) + s2 * &z.d(X) + s3 * &z.d(Y)).scale_int(2);
    Ok(f11.d(X).d(X) + f12.d(X).d(Y) + f22.d(Y).d(Y) + r.d(X).d(X) + r.d(Y).d(Y))
}

/// Which zero-order conservation laws the closed equation keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VorticityReport {
    /// characteristics `h(t)`
    pub circulation: bool,
    /// characteristics `f(t)x`
    pub momentum_x: bool,
    /// characteristics `g(t)y`
    pub momentum_y: bool,
    /// characteristic `ψ`
    pub energy: bool,
}

impl VorticityReport {
    pub fn all(&self) -> bool {
        self.circulation && self.momentum_x && self.momentum_y && self.energy
    }
}

fn admits_times_coordinate(l: &Expression, coord: usize) -> Result<bool> {
    let (ext, f) = l.context().with_function("f", &[T]);
    let c = Expression::function(&ext, f, MultiIndex::zero(1))? * Expression::independent(&ext, coord)?;
    let e = euler(&(c * l.lift(&ext)), 0)?;
    Ok(split_by_arbitrary_functions(&e, &[f])?.is_empty())
}

/// Checks the characteristics `h(t)`, `f(t)x`, `g(t)y`, `ψ` of
/// `lhs − V = 0`.
pub fn verify_closed_vorticity(v: &Expression) -> Result<VorticityReport> {
    let ctx = v.context().clone();
    check_context(&ctx)?;
    let l = vorticity_lhs(&ctx)?.checked_sub(v)?;
    Ok(VorticityReport {
        circulation: verify_family_h(&l, &[T])?,
        momentum_x: admits_times_coordinate(&l, X)?,
        momentum_y: admits_times_coordinate(&l, Y)?,
        energy: is_total_divergence(&(psi(&ctx, &[]) * &l))?,
    })
}

/// A candidate symmetric solution `F = (ψ_yy P² − ψ_xy P³ + R¹, …)`.
#[derive(Clone, Debug)]
pub struct EnergyDecomposition {
    pub p: [Expression; 3],
    pub r: [Expression; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyReport {
    /// `ψ_xx F¹¹ + ψ_xy F¹² + ψ_yy F²²` is a total divergence.
    pub pairing_is_divergence: bool,
    /// The supplied `(P, R)` reproduces `F` exactly.
    pub decomposition_matches: Option<bool>,
    /// `ψ_xx R¹ + ψ_xy R² + ψ_yy R³` is a total divergence.
    pub remainder_is_divergence: Option<bool>,
    /// `Div(ζ²S) = ζ² Div S + 2ζ(S¹ζ_t + S²ζ_x + S³ζ_y)`.
    pub div_q_identity: Option<bool>,
    /// `R = (Div Q/ζ, 0, Div Q/ζ)` solves `ψ_xx R¹ + ψ_xy R² + ψ_yy R³ = Div Q`.
    pub particular_solution: Option<bool>,
}

/// Checks the energy constraint on `(F¹¹, F¹², F²²)` and, when given, a
/// `(P, R)` decomposition and the `Q = ζ²S` particular solution.
pub fn energy_constraint_solve(
    f: &[Expression; 3],
    decomposition: Option<&EnergyDecomposition>,
    s: Option<&[Expression; 3]>,
) -> Result<EnergyReport> {
    let ctx = f[0].context().clone();
    check_context(&ctx)?;
    let (pxx, pxy, pyy) = (psi(&ctx, &[X, X]), psi(&ctx, &[X, Y]), psi(&ctx, &[Y, Y]));
    let pairing = |g: &[Expression; 3]| -> Result<Expression> {
        pxx.checked_mul(&g[0])?
            .checked_add(&pxy.checked_mul(&g[1])?)?
            .checked_add(&pyy.checked_mul(&g[2])?)
    };
    let pairing_is_divergence = is_total_divergence(&pairing(f)?)?;
    let (decomposition_matches, remainder_is_divergence) = match decomposition {
        Some(d) => {
            let [p1, p2, p3] = &d.p;
            let expect = [
                (&pyy * p2 - &pxy * p3).checked_add(&d.r[0])?,
                (&pxx * p3 - &pyy * p1).checked_add(&d.r[1])?,
                (&pxy * p1 - &pxx * p2).checked_add(&d.r[2])?,
            ];
            let mut ok = true;
            for (a, b) in expect.iter().zip(f) {
                ok &= a.checked_sub(b)?.is_zero();
            }
            (Some(ok), Some(is_total_divergence(&pairing(&d.r)?)?))
        }
        None => (None, None),
    };
    let (div_q_identity, particular_solution) = match s {
        Some(s) => {
            let z = zeta(&ctx)?;
            let z2 = &z * &z;
            let q = [z2.checked_mul(&s[0])?, z2.checked_mul(&s[1])?, z2.checked_mul(&s[2])?];
            let div_q = div(&q);
            let expanded = &z2 * &div(s)
                + (&z * &(&s[0] * &z.d(T) + &s[1] * &z.d(X) + &s[2] * &z.d(Y))).scale_int(2);
            let r1 = div_q.checked_div(&z)?;
            let r = [r1.clone(), Expression::zero(&ctx), r1];
            (
                Some(div_q == expanded),
                Some(pairing(&r)?.checked_sub(&div_q)?.is_zero()),
            )
        }
        None => (None, None),
    };
    Ok(EnergyReport {
        pairing_is_divergence,
        decomposition_matches,
        remainder_is_divergence,
        div_q_identity,
        particular_solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(c: &Arc<JetContext>, s: &str) -> Expression {
        Expression::parse(c, s).unwrap()
    }

    #[test]
    fn lhs_expansion() {
        let c = vorticity_context();
        let l = vorticity_lhs(&c).unwrap();
        let expected = e(
            &c,
            "psi_txx + psi_tyy + psi_x*(psi_xxy + psi_yyy) - psi_y*(psi_xxx + psi_xyy)",
        );
        assert_eq!(l, expected);
    }

    #[test]
    fn simple_closures() {
        let c = vorticity_context();
        assert!(build_v(&ClosureData::zero(&c)).unwrap().is_zero());
        let z = Expression::zero(&c);
        let data = ClosureData::new(
            [z.clone(), z.clone(), z.clone()],
            [z.clone(), e(&c, "1"), z.clone()],
        )
        .unwrap();
        let zeta_x = zeta(&c).unwrap().d(X).scale_int(2);
        assert_eq!(build_v(&data).unwrap(), zeta_x.d(X).d(X) + zeta_x.d(Y).d(Y));
        let data = ClosureData::new([e(&c, "psi_y"), z.clone(), z.clone()], [z.clone(), z.clone(), z]).unwrap();
        assert_eq!(
            build_v(&data).unwrap(),
            e(&c, "-psi_yy*psi_y").d(X).d(Y) + e(&c, "psi_xy*psi_y").d(Y).d(Y)
        );
    }

    #[test]
    fn reports() {
        let c = vorticity_context();
        assert!(verify_closed_vorticity(&Expression::zero(&c)).unwrap().all());
        let damped = verify_closed_vorticity(&zeta(&c).unwrap()).unwrap();
        assert!(damped.circulation && damped.momentum_x && damped.momentum_y);
        assert!(!damped.energy);
        let rep = energy_constraint_solve(&[e(&c, "psi"), e(&c, "0"), e(&c, "0")], None, None).unwrap();
        assert!(!rep.pairing_is_divergence);
        let rep = energy_constraint_solve(&[e(&c, "1"), e(&c, "0"), e(&c, "0")], None, None).unwrap();
        assert!(rep.pairing_is_divergence);
    }
}
