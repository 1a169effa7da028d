use super::program::{LinearProgram, LpKind, Sense, VarLabel};
use crate::error::{Error, Result};
use crate::model::Instance;

/// Default cap on CDLP-N variables.
pub const DEFAULT_VAR_CAP: usize = 100_000;

/// CDLP-N: one variable per (t, S), inventory rows and per-period convexity
/// equalities.
pub fn build_cdlp_n(inst: &Instance) -> Result<LinearProgram<f64>> {
    build_cdlp_n_capped(inst, DEFAULT_VAR_CAP)
}

pub fn build_cdlp_n_capped(inst: &Instance, cap: usize) -> Result<LinearProgram<f64>> {
    let fam = inst.family();
    let (horizon, nf, n) = (inst.horizon(), fam.len(), inst.n_items());
    let vars = horizon * nf;
    if vars > cap {
        return Err(Error::TooLarge { vars, cap });
    }
    let mut lp = LinearProgram::new(LpKind::CdlpN);
    let mut inv = vec![vec![0.0; vars]; n];
    for t in 0..horizon {
        for s in 0..nf {
            let k = lp.add_var(VarLabel::Assortment { period: Some(t), index: s }, inst.revenue_rate(t, s));
            let law = inst.law(t, s);
            for (p, q) in law.products().iter().zip(law.means()) {
                inv[p.item][k] += q;
            }
        }
    }
    for (i, row) in inv.into_iter().enumerate() {
        lp.add_row(format!("inv_{i}"), row, Sense::Le, inst.inventories()[i])?;
    }
    for t in 0..horizon {
        let mut row = vec![0.0; vars];
        row[t * nf..(t + 1) * nf].iter_mut().for_each(|a| *a = 1.0);
        lp.add_row(format!("period_{t}"), row, Sense::Eq, 1.0)?;
    }
    Ok(lp)
}

/// CDLP-S: one variable per S, objective and inventory rows scaled by T.
#[allow(clippy::needless_range_loop)]
pub fn build_cdlp_s(inst: &Instance) -> Result<LinearProgram<f64>> {
    require_stationary(inst, "CDLP-S")?;
    let fam = inst.family();
    let (nf, tt) = (fam.len(), inst.horizon() as f64);
    let mut lp = LinearProgram::new(LpKind::CdlpS);
    let mut inv = vec![vec![0.0; nf]; inst.n_items()];
    for s in 0..nf {
        lp.add_var(VarLabel::Assortment { period: None, index: s }, tt * inst.revenue_rate(0, s));
        let law = inst.law(0, s);
        for (p, q) in law.products().iter().zip(law.means()) {
            inv[p.item][s] += tt * q;
        }
    }
    for (i, row) in inv.into_iter().enumerate() {
        lp.add_row(format!("inv_{i}"), row, Sense::Le, inst.inventories()[i])?;
    }
    lp.add_row("convexity", vec![1.0; nf], Sense::Eq, 1.0)?;
    Ok(lp)
}

/// DLP-S (single item, stationary): T Σ q_j x_j <= b, Σ x_j <= 1.
pub fn build_dlp_s(inst: &Instance) -> Result<LinearProgram<f64>> {
    inst.require_single_item("DLP-S")?;
    require_stationary(inst, "DLP-S")?;
    let tt = inst.horizon() as f64;
    let q = price_means(inst, 0)?;
    let m = inst.n_prices();
    let mut lp = LinearProgram::new(LpKind::DlpS);
    for (j, qj) in q.iter().enumerate() {
        lp.add_var(VarLabel::Price { period: None, index: j }, tt * inst.prices()[j] * qj);
    }
    lp.add_row("inv_0", q.iter().map(|qj| tt * qj).collect(), Sense::Le, inst.inventories()[0])?;
    lp.add_row("convexity", vec![1.0; m], Sense::Le, 1.0)?;
    Ok(lp)
}

/// DLP-N (single item): variables x_tj, Σ_t Σ_j q_tj x_tj <= b, Σ_j x_tj <= 1.
pub fn build_dlp_n(inst: &Instance) -> Result<LinearProgram<f64>> {
    inst.require_single_item("DLP-N")?;
    let (horizon, m) = (inst.horizon(), inst.n_prices());
    let mut lp = LinearProgram::new(LpKind::DlpN);
    let mut inv = Vec::with_capacity(horizon * m);
    for t in 0..horizon {
        let q = price_means(inst, t)?;
        for (j, qj) in q.iter().enumerate() {
            lp.add_var(VarLabel::Price { period: Some(t), index: j }, inst.prices()[j] * qj);
            inv.push(*qj);
        }
    }
    lp.add_row("inv_0", inv, Sense::Le, inst.inventories()[0])?;
    for t in 0..horizon {
        let mut row = vec![0.0; horizon * m];
        row[t * m..(t + 1) * m].iter_mut().for_each(|a| *a = 1.0);
        lp.add_row(format!("period_{t}"), row, Sense::Le, 1.0)?;
    }
    Ok(lp)
}

/// The upper-bound LP matching the instance: CDLP-S when stationary, else CDLP-N.
pub fn build_upper_bound_lp(inst: &Instance) -> Result<LinearProgram<f64>> {
    if inst.is_stationary() {
        build_cdlp_s(inst)
    } else {
        build_cdlp_n(inst)
    }
}

fn price_means(inst: &Instance, t: usize) -> Result<Vec<f64>> {
    (0..inst.n_prices())
        .map(|j| {
            let s = inst
                .family()
                .singleton(0, j)
                .ok_or_else(|| Error::Invalid(format!("family lacks the single-price assortment for price {j}")))?;
            Ok(inst.law(t, s).means()[0])
        })
        .collect()
}

fn require_stationary(inst: &Instance, what: &'static str) -> Result<()> {
    if !inst.is_stationary() {
        return Err(Error::Unsupported {
            what,
            requirement: "a stationary instance",
        });
    }
    Ok(())
}
