//! Satisfiability of valuation-constraint systems over the completed
//! ultrametric tree with p-fold branching at every level.
//!
//! A system places finitely many centers (with known pairwise distances
//! `V(A_i - A_j)`) and asks for a point `z` with `V(z - A_i) CMP theta_i`.
//! Exploration runs level by level: at each level the current cluster of
//! centers splits into child classes; `z` follows one class or branches off
//! into a fresh child (possible whenever fewer than `p` children are
//! occupied). Centers that separate from `z` at level `l` pin
//! `V(z - A_i) = l` and their constraints are checked on the spot. Beyond
//! the deepest finite quantity only two resolutions remain: `z` escapes the
//! surviving (pairwise-coincident) centers at some large finite level, or
//! `z` equals them, which is admissible only when the caller marked the
//! point admissible (it must lie in the required coset and on the right
//! side of `H`).

use crate::formula::Cmp;
use crate::group::Val;

#[derive(Debug, Clone)]
pub struct TreeSystem {
    /// Branching width of the tree (the prime `p`).
    pub branching: u64,
    /// Pairwise center distances; `dist[i][i] = Inf`. Must be ultrametrically
    /// coherent (the minimum of every triangle is attained twice).
    pub dist: Vec<Vec<Val>>,
    /// `V(z - A_i) CMP theta`.
    pub constraints: Vec<(usize, Cmp, Val)>,
    /// Whether `z = A_i` is allowed. `None` means unresolved, which is safe
    /// as long as every center carrying a `= inf` / `>= inf` constraint is
    /// resolved.
    pub point_admissible: Vec<Option<bool>>,
}

pub fn consistent(sys: &TreeSystem) -> bool {
    debug_assert!(coherent(&sys.dist));
    let k = sys.dist.len();
    let mut per_center: Vec<Vec<(Cmp, Val)>> = vec![Vec::new(); k];
    for (i, cmp, theta) in &sys.constraints {
        match theta {
            Val::Fin(t) if *t < 0 => match cmp {
                Cmp::Ge | Cmp::Gt => continue, // vacuous: V >= 0 always
                Cmp::Lt | Cmp::Le | Cmp::Eq => return false,
            },
            Val::Fin(0) if *cmp == Cmp::Lt => return false,
            Val::Inf if *cmp == Cmp::Gt => return false,
            _ => {}
        }
        per_center[*i].push((*cmp, *theta));
    }

    let mut l_stop = 0i64;
    for row in &sys.dist {
        for d in row {
            if let Val::Fin(v) = d {
                l_stop = l_stop.max(*v);
            }
        }
    }
    for cs in &per_center {
        for (_, theta) in cs {
            if let Val::Fin(v) = theta {
                l_stop = l_stop.max(*v);
            }
        }
    }

    let all: Vec<usize> = (0..k).collect();
    solve(sys, &per_center, &all, 0, l_stop)
}

fn solve(
    sys: &TreeSystem,
    per_center: &[Vec<(Cmp, Val)>],
    cluster: &[usize],
    level: i64,
    l_stop: i64,
) -> bool {
    if cluster.is_empty() {
        return true;
    }
    if level > l_stop {
        return final_check(sys, per_center, cluster);
    }
    let classes = partition(sys, cluster, level + 1);
    let sep_ok = |i: usize| {
        per_center[i].iter().all(|(cmp, theta)| cmp.eval(&Val::Fin(level), theta))
    };
    for class in &classes {
        let leavers_ok = cluster.iter().filter(|i| !class.contains(i)).all(|&i| sep_ok(i));
        if leavers_ok && solve(sys, per_center, class, level + 1, l_stop) {
            return true;
        }
    }
    // fresh child: z separates from the whole cluster at this level
    if (classes.len() as u64) < sys.branching && cluster.iter().all(|&i| sep_ok(i)) {
        return true;
    }
    false
}

/// Split a cluster (pairwise distance >= level) into the child classes at
/// `level` (equivalence `dist >= level`).
fn partition(sys: &TreeSystem, cluster: &[usize], level: i64) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    'next: for &i in cluster {
        for class in classes.iter_mut() {
            let rep = class[0];
            if sys.dist[rep][i] >= Val::Fin(level) {
                class.push(i);
                continue 'next;
            }
        }
        classes.push(vec![i]);
    }
    classes
}

/// Past every finite quantity the surviving cluster is a single point
/// (pairwise distances exceed all finite distances, hence are infinite):
/// `z` either escapes at an arbitrarily deep level or coincides with it.
fn final_check(sys: &TreeSystem, per_center: &[Vec<(Cmp, Val)>], cluster: &[usize]) -> bool {
    let escape = cluster.iter().all(|&i| {
        per_center[i].iter().all(|(cmp, theta)| match (cmp, theta) {
            (Cmp::Ge | Cmp::Gt, Val::Fin(_)) => true,
            (Cmp::Lt | Cmp::Le, Val::Inf) => true,
            _ => false,
        })
    });
    if escape {
        return true;
    }
    let constraints_allow_point = cluster
        .iter()
        .all(|&i| per_center[i].iter().all(|(cmp, theta)| cmp.eval(&Val::Inf, theta)));
    let no_veto = cluster.iter().all(|&i| sys.point_admissible[i] != Some(false));
    let someone_admissible = cluster.iter().any(|&i| sys.point_admissible[i] == Some(true));
    constraints_allow_point && no_veto && someone_admissible
}

fn coherent(dist: &[Vec<Val>]) -> bool {
    let k = dist.len();
    for i in 0..k {
        if dist[i][i] != Val::Inf {
            return false;
        }
        for j in 0..k {
            if dist[i][j] != dist[j][i] {
                return false;
            }
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                let (a, b, c) = (dist[i][j], dist[j][l], dist[i][l]);
                let min = a.min(b).min(c);
                let hits = [a, b, c].iter().filter(|v| **v == min).count();
                if hits < 2 {
                    return false;
                }
            }
        }
    }
    true
}

/// Coherence of a distance matrix; exposed so callers enumerating abstract
/// configurations can pre-filter impossible ones.
pub fn is_coherent(dist: &[Vec<Val>]) -> bool {
    coherent(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(
        p: u64,
        dist: Vec<Vec<Val>>,
        constraints: Vec<(usize, Cmp, Val)>,
    ) -> TreeSystem {
        let k = dist.len();
        TreeSystem { branching: p, dist, constraints, point_admissible: vec![Some(true); k] }
    }

    fn two_centers(d: Val) -> Vec<Vec<Val>> {
        vec![vec![Val::Inf, d], vec![d, Val::Inf]]
    }

    #[test]
    fn close_balls_around_distant_centers_clash() {
        // V(z-a) >= 3 and V(z-b) >= 3 with V(a-b) = 1: the ultrametric
        // inequality forces V(a-b) >= 3
        let s = sys(
            5,
            two_centers(Val::Fin(1)),
            vec![(0, Cmp::Ge, Val::Fin(3)), (1, Cmp::Ge, Val::Fin(3))],
        );
        assert!(!consistent(&s));
    }

    #[test]
    fn annulus_is_satisfiable() {
        let s = sys(
            5,
            vec![vec![Val::Inf]],
            vec![(0, Cmp::Ge, Val::Fin(2)), (0, Cmp::Lt, Val::Fin(5))],
        );
        assert!(consistent(&s));
    }

    #[test]
    fn isosceles_spheres_agree() {
        // distance exactly 2 from a forces distance 2 from b when
        // V(a-b) >= 5
        let s = sys(
            5,
            two_centers(Val::Fin(5)),
            vec![(0, Cmp::Eq, Val::Fin(2)), (1, Cmp::Eq, Val::Fin(2))],
        );
        assert!(consistent(&s));
    }

    #[test]
    fn empty_annulus_contradiction() {
        let s = sys(
            5,
            vec![vec![Val::Inf]],
            vec![(0, Cmp::Ge, Val::Fin(1)), (0, Cmp::Lt, Val::Fin(1))],
        );
        assert!(!consistent(&s));
    }

    #[test]
    fn binary_tree_runs_out_of_children() {
        // at p = 2 the root has two children; z cannot avoid both centers
        // that already occupy them
        let s = sys(
            2,
            two_centers(Val::Fin(0)),
            vec![(0, Cmp::Eq, Val::Fin(0)), (1, Cmp::Eq, Val::Fin(0))],
        );
        assert!(!consistent(&s));
        // at p = 3 a third child is free
        let s3 = sys(
            3,
            two_centers(Val::Fin(0)),
            vec![(0, Cmp::Eq, Val::Fin(0)), (1, Cmp::Eq, Val::Fin(0))],
        );
        assert!(consistent(&s3));
    }

    #[test]
    fn forced_point_respects_admissibility() {
        let mut s = sys(5, vec![vec![Val::Inf]], vec![(0, Cmp::Eq, Val::Inf)]);
        assert!(consistent(&s));
        s.point_admissible = vec![Some(false)];
        assert!(!consistent(&s));
    }

    #[test]
    fn point_witness_must_fit_companions() {
        // z = a (forced) with a companion demanding V(z-b) = 1 while
        // V(a-b) = 4 is impossible
        let s = sys(
            5,
            two_centers(Val::Fin(4)),
            vec![(0, Cmp::Eq, Val::Inf), (1, Cmp::Eq, Val::Fin(1))],
        );
        assert!(!consistent(&s));
        // but with V(a-b) = 1 it works
        let s2 = sys(
            5,
            two_centers(Val::Fin(1)),
            vec![(0, Cmp::Eq, Val::Inf), (1, Cmp::Eq, Val::Fin(1))],
        );
        assert!(consistent(&s2));
    }
}
