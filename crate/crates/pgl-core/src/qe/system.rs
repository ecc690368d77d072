//! Ground ball systems: the shape a normalized single-variable conjunct
//! takes after congruence combination, and the operations on it —
//! consistency over the completed tree (backed by the density axioms) and
//! bounded exhaustive witness search.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::formula::Cmp;
use crate::group::{GroupElement, Val};
use crate::qe::tree::{self, TreeSystem};

/// Largest congruence modulus the engine will combine to.
pub const MODULUS_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HFlag {
    Unconstrained,
    InH,
    NotInH,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coset {
    pub modulus: u64,
    pub rep: GroupElement,
}

#[derive(Debug, Clone)]
pub struct BallConstraint {
    pub center: GroupElement,
    pub cmp: Cmp,
    pub radius: Val,
}

/// A ground system `V(z - center_i) CMP radius_i` for `z = coeff * x`,
/// together with the combined coset constraint and the `H`-membership flag
/// on `x`. Pairwise center distances are computed exactly once.
#[derive(Debug, Clone)]
pub struct BallSystem {
    pub var: String,
    pub coeff: BigInt,
    pub constraints: Vec<BallConstraint>,
    pub coset: Option<Coset>,
    pub hflag: HFlag,
}

/// Combine congruence atoms `z = c_j mod n_j` (componentwise on exponents)
/// into a single coset, or detect inconsistency. The empty list yields the
/// trivial coset `z = 0 mod 1`.
pub fn combine_congruences(atoms: &[(GroupElement, u64)]) -> Option<Coset> {
    let mut rep = GroupElement::identity();
    let mut modulus: u64 = 1;
    for (c, n) in atoms {
        let (m1, r1) = crt_component(&rep.m, modulus, &c.m, *n)?;
        let (_, r2) = crt_component(&rep.n, modulus, &c.n, *n)?;
        rep = GroupElement::new(r1, r2);
        modulus = m1;
    }
    Some(Coset { modulus, rep })
}

/// CRT on one exponent component: `x = a1 mod n1`, `x = a2 mod n2`.
fn crt_component(a1: &BigInt, n1: u64, a2: &BigInt, n2: u64) -> Option<(u64, BigInt)> {
    let (n1b, n2b) = (BigInt::from(n1), BigInt::from(n2));
    let ext = BigInt::extended_gcd(&n1b, &n2b);
    let g = ext.gcd.clone();
    let diff = a2 - a1;
    if !(&diff % &g).is_zero() {
        return None;
    }
    let lcm = &n1b / &g * &n2b;
    // a1 + n1 * ((diff/g) * x mod (n2/g)) solves both congruences
    let step = (&diff / &g * &ext.x).mod_floor(&(&n2b / &g));
    let rep = (a1 + &n1b * step).mod_floor(&lcm);
    let lcm_u64 = u64::try_from(lcm).ok()?;
    Some((lcm_u64, rep))
}

impl BallSystem {
    /// Does the coset contain points on the required side of `H`?
    /// `H + NG` meets the coset iff the beta exponent of the representative
    /// vanishes mod `N`; the complement of `H` meets every coset.
    pub fn h_side_feasible(&self) -> bool {
        match (self.hflag, &self.coset) {
            (HFlag::InH, Some(c)) => c.rep.n.is_multiple_of(&BigInt::from(c.modulus)),
            _ => true,
        }
    }

    /// May `z` equal this exact point, given the coset and `H`-flag?
    fn point_admissible(&self, point: &GroupElement) -> bool {
        let coset_ok = match &self.coset {
            Some(c) => {
                let nn = BigInt::from(c.modulus);
                (&point.m - &c.rep.m).is_multiple_of(&nn)
                    && (&point.n - &c.rep.n).is_multiple_of(&nn)
            }
            None => true,
        };
        let h_ok = match self.hflag {
            HFlag::Unconstrained => true,
            HFlag::InH => point.in_h(),
            HFlag::NotInH => !point.in_h(),
        };
        coset_ok && h_ok
    }

    fn tree_system(&self, cfg: &Config) -> TreeSystem {
        let mut centers: Vec<GroupElement> =
            self.constraints.iter().map(|c| c.center.clone()).collect();
        let mut constraints: Vec<(usize, Cmp, Val)> = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.cmp, c.radius))
            .collect();
        if let Some(coset) = &self.coset {
            if coset.modulus > 1 {
                let vpn = crate::rational::vp_bigint(&BigInt::from(coset.modulus), cfg.p())
                    .expect("modulus >= 1");
                centers.push(coset.rep.clone());
                constraints.push((centers.len() - 1, Cmp::Ge, Val::Fin(vpn)));
            }
        }
        let k = centers.len();
        let mut dist = vec![vec![Val::Inf; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let d = cfg.big_v(&centers[i].sub(&centers[j]));
                dist[i][j] = d;
                dist[j][i] = d;
            }
        }
        let point_admissible =
            centers.iter().map(|c| Some(self.point_admissible(c))).collect();
        TreeSystem { branching: cfg.p(), dist, constraints, point_admissible }
    }

    /// Satisfiability in the completed p-branching tree intersected with the
    /// ambient coset ball; by the density axioms this equals satisfiability
    /// in `G` (respectively in `H` or `G \ H` per the flag).
    pub fn ball_consistency(&self, cfg: &Config) -> bool {
        if !self.h_side_feasible() {
            return false;
        }
        tree::consistent(&self.tree_system(cfg))
    }

    /// Does a concrete `x` satisfy the whole system?
    pub fn accepts(&self, cfg: &Config, x: &GroupElement) -> bool {
        let z = x.scale(&self.coeff);
        let h_ok = match self.hflag {
            HFlag::Unconstrained => true,
            HFlag::InH => x.in_h(),
            HFlag::NotInH => !x.in_h(),
        };
        if !h_ok {
            return false;
        }
        if let Some(c) = &self.coset {
            let nn = BigInt::from(c.modulus);
            if !(&z.m - &c.rep.m).is_multiple_of(&nn) || !(&z.n - &c.rep.n).is_multiple_of(&nn) {
                return false;
            }
        }
        self.constraints
            .iter()
            .all(|c| c.cmp.eval(&cfg.big_v(&z.sub(&c.center)), &c.radius))
    }

    /// The coset induced on `x` itself (`z = coeff * x`): `x = rep/coeff
    /// mod modulus/coeff`. The combined system always contains
    /// `z = 0 mod coeff`, so the division is exact.
    fn x_coset(&self) -> Result<(u64, GroupElement)> {
        match &self.coset {
            None => Ok((1, GroupElement::identity())),
            Some(c) => {
                let l = &self.coeff;
                let labs = u64::try_from(l.abs())
                    .map_err(|_| Error::Overflow("coefficient too large".into()))?;
                if labs == 0 {
                    return Err(Error::Domain("zero coefficient on the variable".into()));
                }
                if c.modulus % labs != 0
                    || !(&c.rep.m % l).is_zero()
                    || !(&c.rep.n % l).is_zero()
                {
                    return Err(Error::Domain(
                        "coset not divisible by the coefficient; congruence combination \
                         must include the coefficient divisibility condition"
                            .into(),
                    ));
                }
                Ok((c.modulus / labs, GroupElement::new(&c.rep.m / l, &c.rep.n / l)))
            }
        }
    }
}

/// Exhaustive scan for a witness `x` with `|m|, |n| <= bound` in the
/// required coset; returns the smallest witness in lexicographic order of
/// `(|m| + |n|, m, n)`, or `None` when no witness lies within the bound.
pub fn witness_search(sys: &BallSystem, bound: u64, cfg: &Config) -> Result<Option<GroupElement>> {
    let (step, base) = sys.x_coset()?;
    let shells = shell_list(bound);
    #[cfg(feature = "parallel")]
    {
        Ok(witness_scan_shells_par(sys, cfg, &shells, step, &base, bound))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(witness_scan_shells_seq(sys, cfg, &shells, step, &base, bound))
    }
}

/// Sequential scan, available regardless of features for benchmarking.
pub fn witness_search_seq(
    sys: &BallSystem,
    bound: u64,
    cfg: &Config,
) -> Result<Option<GroupElement>> {
    let (step, base) = sys.x_coset()?;
    let shells = shell_list(bound);
    Ok(witness_scan_shells_seq(sys, cfg, &shells, step, &base, bound))
}

#[cfg(feature = "parallel")]
pub fn witness_search_par(
    sys: &BallSystem,
    bound: u64,
    cfg: &Config,
) -> Result<Option<GroupElement>> {
    let (step, base) = sys.x_coset()?;
    let shells = shell_list(bound);
    Ok(witness_scan_shells_par(sys, cfg, &shells, step, &base, bound))
}

fn shell_list(bound: u64) -> Vec<i64> {
    (0..=(2 * bound as i64)).collect()
}

fn witness_scan_shells_seq(
    sys: &BallSystem,
    cfg: &Config,
    shells: &[i64],
    step: u64,
    base: &GroupElement,
    bound: u64,
) -> Option<GroupElement> {
    for &s in shells {
        let mut hits = shell_candidates(s, bound)
            .into_iter()
            .filter(|(m, n)| in_x_coset(*m, *n, step, base))
            .map(|(m, n)| GroupElement::from_i64(m, n))
            .filter(|g| sys.accepts(cfg, g));
        if let Some(first) = hits.next() {
            return Some(first);
        }
    }
    None
}

#[cfg(feature = "parallel")]
fn witness_scan_shells_par(
    sys: &BallSystem,
    cfg: &Config,
    shells: &[i64],
    step: u64,
    base: &GroupElement,
    bound: u64,
) -> Option<GroupElement> {
    use rayon::prelude::*;
    for &s in shells {
        let hit = shell_candidates(s, bound)
            .into_par_iter()
            .filter(|(m, n)| in_x_coset(*m, *n, step, base))
            .map(|(m, n)| GroupElement::from_i64(m, n))
            .filter(|g| sys.accepts(cfg, g))
            .min_by_key(|g| (g.m.clone(), g.n.clone()));
        if let Some(w) = hit {
            return Some(w);
        }
    }
    None
}

/// Candidates on the shell `|m| + |n| = s`, clipped to the box, in
/// lexicographic order of `(m, n)`.
fn shell_candidates(s: i64, bound: u64) -> Vec<(i64, i64)> {
    let b = bound as i64;
    let mut out = Vec::new();
    for m in -s.min(b)..=s.min(b) {
        let rest = s - m.abs();
        if rest > b {
            continue;
        }
        if rest == 0 {
            out.push((m, 0));
        } else {
            out.push((m, -rest));
            out.push((m, rest));
        }
    }
    out
}

fn in_x_coset(m: i64, n: i64, step: u64, base: &GroupElement) -> bool {
    if step == 1 {
        return true;
    }
    let s = BigInt::from(step);
    (BigInt::from(m) - &base.m).is_multiple_of(&s)
        && (BigInt::from(n) - &base.n).is_multiple_of(&s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::new(5, 6, 11).unwrap()
    }

    fn ge(m: i64, n: i64, r: i64) -> BallConstraint {
        BallConstraint { center: GroupElement::from_i64(m, n), cmp: Cmp::Ge, radius: Val::Fin(r) }
    }

    #[test]
    fn crt_on_exponents() {
        // z = (1,0) mod 2 and z = (1,0) mod 3 combine to mod 6
        let c = combine_congruences(&[
            (GroupElement::from_i64(1, 0), 2),
            (GroupElement::from_i64(1, 0), 3),
        ])
        .unwrap();
        assert_eq!(c.modulus, 6);
        assert_eq!(c.rep, GroupElement::from_i64(1, 0));
        // alpha and beta lie in distinct cosets mod 2
        assert!(combine_congruences(&[
            (GroupElement::from_i64(1, 0), 2),
            (GroupElement::from_i64(0, 1), 2),
        ])
        .is_none());
        // empty system: no constraint
        let trivial = combine_congruences(&[]).unwrap();
        assert_eq!(trivial.modulus, 1);
    }

    #[test]
    fn crt_nontrivial_overlap() {
        // z = (2,0) mod 4 and z = (0,0) mod 6: gcd 2 divides the difference
        let c = combine_congruences(&[
            (GroupElement::from_i64(2, 0), 4),
            (GroupElement::from_i64(0, 0), 6),
        ])
        .unwrap();
        assert_eq!(c.modulus, 12);
        assert_eq!(c.rep.m.mod_floor(&BigInt::from(4)), BigInt::from(2));
        assert_eq!(c.rep.m.mod_floor(&BigInt::from(6)), BigInt::from(0));
        // incompatible overlap: 1 mod 2 vs 0 mod 4
        assert!(combine_congruences(&[
            (GroupElement::from_i64(1, 0), 2),
            (GroupElement::from_i64(0, 0), 4),
        ])
        .is_none());
    }

    #[test]
    fn density_backed_coset_ball() {
        // x = a mod 2 with V(x - a) >= 9: SAT by regular density
        let c = cfg();
        let sys = BallSystem {
            var: "x".into(),
            coeff: BigInt::from(1),
            constraints: vec![ge(1, 0, 9)],
            coset: Some(Coset { modulus: 2, rep: GroupElement::from_i64(1, 0) }),
            hflag: HFlag::Unconstrained,
        };
        assert!(sys.ball_consistency(&c));
    }

    #[test]
    fn h_flag_blocks_infeasible_coset() {
        let c = cfg();
        // x in H with x = b mod 2: the coset has no H-points
        let sys = BallSystem {
            var: "x".into(),
            coeff: BigInt::from(1),
            constraints: vec![],
            coset: Some(Coset { modulus: 2, rep: GroupElement::from_i64(0, 1) }),
            hflag: HFlag::InH,
        };
        assert!(!sys.ball_consistency(&c));
        let sys2 = BallSystem { hflag: HFlag::NotInH, ..sys };
        assert!(sys2.ball_consistency(&c));
    }

    #[test]
    fn witness_search_finds_minimal() {
        let c = cfg();
        let sys = BallSystem {
            var: "x".into(),
            coeff: BigInt::from(1),
            constraints: vec![ge(1, 0, 2)],
            coset: Some(Coset { modulus: 2, rep: GroupElement::from_i64(1, 0) }),
            hflag: HFlag::Unconstrained,
        };
        let w = witness_search(&sys, 200, &c).unwrap().expect("witness exists");
        assert!(sys.accepts(&c, &w));
        // m odd, n even by the coset
        assert!(w.m.is_odd() && w.n.is_even());
        // nothing earlier in the (|m|+|n|, m, n) order satisfies the system
        let key = |g: &GroupElement| (g.m.abs() + g.n.abs(), g.m.clone(), g.n.clone());
        let wkey = key(&w);
        let s_w = i64::try_from(w.m.abs() + w.n.abs()).unwrap();
        for s in 0..=s_w {
            for (m, n) in shell_candidates(s, 200) {
                let g = GroupElement::from_i64(m, n);
                if key(&g) < wkey {
                    assert!(!sys.accepts(&c, &g), "smaller witness ({m},{n})");
                }
            }
        }
    }

    #[test]
    fn unsat_system_has_no_witness() {
        let c = cfg();
        let sys = BallSystem {
            var: "x".into(),
            coeff: BigInt::from(1),
            constraints: vec![
                ge(0, 0, 1),
                BallConstraint {
                    center: GroupElement::identity(),
                    cmp: Cmp::Lt,
                    radius: Val::Fin(1),
                },
            ],
            coset: None,
            hflag: HFlag::Unconstrained,
        };
        assert!(!sys.ball_consistency(&c));
        assert_eq!(witness_search(&sys, 30, &c).unwrap(), None);
    }

    #[test]
    fn trivial_witness_is_the_center() {
        let c = cfg();
        let sys = BallSystem {
            var: "x".into(),
            coeff: BigInt::from(1),
            constraints: vec![ge(1, 0, 0)],
            coset: None,
            hflag: HFlag::Unconstrained,
        };
        // V(x - a) >= 0 holds everywhere; smallest witness is the identity
        assert_eq!(witness_search(&sys, 10, &c).unwrap(), Some(GroupElement::identity()));
    }
}
