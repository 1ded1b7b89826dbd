//! Fixed workloads shared by the benchmarks.

use std::sync::Arc;

use conslaw_core::vorticity::vorticity_context;
use conslaw_core::{ClosureData, Expression, JetContext};

pub fn ode() -> Arc<JetContext> {
    JetContext::parse("vars t; unknowns u").expect("valid header")
}

pub fn evolution() -> Arc<JetContext> {
    JetContext::parse("vars t x; unknowns u").expect("valid header")
}

pub fn expr(ctx: &Arc<JetContext>, text: &str) -> Expression {
    Expression::parse(ctx, text).expect("valid expression")
}

pub fn exprs(ctx: &Arc<JetContext>, items: &[&str]) -> Vec<Expression> {
    items.iter().map(|s| expr(ctx, s)).collect()
}

/// Two second-order factors with a polynomial `H`: the verification of the
/// constructed order-5 equation dominates.
pub fn heavy_ode() -> (Vec<Expression>, Expression) {
    let c = ode();
    (exprs(&c, &["t - u", "-3*t*u*u'*u'' - 3*u'*u''"]), expr(&c, "2*u'' + 2*u*u'"))
}

pub fn kdv_densities() -> (Vec<Expression>, Expression) {
    let c = evolution();
    (exprs(&c, &["u", "u^2/2"]), expr(&c, "-u_x/2 - u^3/(6*u_x)"))
}

pub fn closure() -> ClosureData {
    let c = vorticity_context();
    let e = |s| expr(&c, s);
    ClosureData::new(
        [e("psi_y*x"), e("psi_x^2"), e("psi*y")],
        [e("x*psi_x"), e("psi_y"), e("y^2")],
    )
    .expect("same context")
}
