//! Constructors for the connectivity formulas `γ`, `γ′` and the tree-depth
//! formulas `τ_d`, `τ′_d`.
//!
//! Restriction to a subset `C` is syntactic: every quantifier inside the
//! relativized formula is guarded by membership in `C`. Set quantifiers use the
//! guard shape `forall z . (z in X -> cond)` that the evaluator enumerates
//! efficiently.

use super::{Formula, MsoError, Term};

/// Name of the outermost vertex variable of `τ_d` / `τ′_d` for `d >= 1`.
pub const TAU_ROOT_VAR: &str = "r";

struct Names(usize);

impl Names {
    fn fresh(&mut self, prefix: &str) -> String {
        self.0 += 1;
        format!("{prefix}{}", self.0)
    }
}

fn var(s: &str) -> Term {
    Term::Var(s.to_string())
}

fn member(x: &str, set: &str) -> Formula {
    Formula::member(var(x), set)
}

/// `x in U` when relativized, otherwise `f` alone.
fn within(u: Option<&str>, x: &str, f: Formula) -> Formula {
    match u {
        Some(u) => Formula::and(member(x, u), f),
        None => f,
    }
}

fn adjacent(p: &str, q: &str, prime: bool) -> Formula {
    let e = Formula::edge(var(p), var(q));
    if !prime {
        return e;
    }
    let ab = Formula::and(Formula::eq(var(p), Term::A), Formula::eq(var(q), Term::B));
    let ba = Formula::and(Formula::eq(var(p), Term::B), Formula::eq(var(q), Term::A));
    Formula::or(Formula::or(e, ab), ba)
}

/// `forall z . (z in X -> cond(z))`.
fn subset_of(names: &mut Names, x: &str, cond: impl FnOnce(&str) -> Formula) -> Formula {
    let z = names.fresh("z");
    let c = cond(&z);
    Formula::forall(&z, Formula::implies(member(&z, x), c))
}

fn connected(names: &mut Names, u: Option<&str>, prime: bool) -> Formula {
    let x_set = names.fresh("X");
    let guard = match u {
        Some(u) => Some(subset_of(names, &x_set, |z| member(z, u))),
        None => None,
    };
    let x = names.fresh("x");
    let y = names.fresh("y");
    let p = names.fresh("p");
    let q = names.fresh("q");
    let nonempty = Formula::exists(&x, member(&x, &x_set));
    let not_all = Formula::exists(&y, within(u, &y, Formula::not(member(&y, &x_set))));
    let crossing = Formula::exists(
        &p,
        Formula::exists(
            &q,
            Formula::and(
                Formula::and(
                    member(&p, &x_set),
                    within(u, &q, Formula::not(member(&q, &x_set))),
                ),
                adjacent(&p, &q, prime),
            ),
        ),
    );
    let body = Formula::implies(Formula::and(nonempty, not_all), crossing);
    let body = match guard {
        Some(g) => Formula::implies(g, body),
        None => body,
    };
    Formula::forall_set(&x_set, body)
}

/// `γ`: the structure is connected. True on the empty structure.
pub fn build_gamma() -> Formula {
    connected(&mut Names(0), None, false)
}

/// `γ′`: the structure with the extra edge `{a, b}` is connected.
pub fn build_gamma_prime() -> Formula {
    connected(&mut Names(0), None, true)
}

fn tau(names: &mut Names, d: usize, u: Option<&str>, prime: bool) -> Formula {
    if d == 1 {
        return match u {
            None => {
                let x = names.fresh("x");
                Formula::exists(
                    TAU_ROOT_VAR,
                    Formula::forall(&x, Formula::eq(var(&x), var(TAU_ROOT_VAR))),
                )
            }
            Some(u) => {
                let x = names.fresh("x");
                let y = names.fresh("y");
                Formula::forall(
                    &x,
                    Formula::forall(
                        &y,
                        Formula::implies(
                            Formula::and(member(&x, u), member(&y, u)),
                            Formula::eq(var(&x), var(&y)),
                        ),
                    ),
                )
            }
        };
    }
    let v = if u.is_none() {
        TAU_ROOT_VAR.to_string()
    } else {
        names.fresh("v")
    };
    let c = names.fresh("C");
    let guard = subset_of(names, &c, |z| {
        within(u, z, Formula::not(Formula::eq(var(z), var(&v))))
    });
    let w = names.fresh("w");
    let premise = Formula::and(
        connected(names, Some(&c), prime),
        Formula::exists(&w, member(&w, &c)),
    );
    let inner = Formula::implies(premise, tau(names, d - 1, Some(&c), prime));
    let all_c = Formula::forall_set(&c, Formula::implies(guard, inner));
    Formula::exists(&v, within(u, &v, all_c))
}

/// `τ_d`: on a connected nonempty structure, true iff the tree-depth is at
/// most `d`. Of the form `exists r . body` with `r` the decomposition root.
pub fn build_tau(d: usize) -> Result<Formula, MsoError> {
    if d == 0 {
        return Err(MsoError::InvalidDepth(d));
    }
    Ok(tau(&mut Names(0), d, None, false))
}

/// `τ′_d`: `τ_d` for the structure with the extra edge `{a, b}`.
pub fn build_tau_prime(d: usize) -> Result<Formula, MsoError> {
    if d == 0 {
        return Err(MsoError::InvalidDepth(d));
    }
    Ok(tau(&mut Names(0), d, None, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DynamicGraph;
    use crate::mso::{evaluate, parse, ConstantAssignment, EvalOptions};

    fn ev(g: &DynamicGraph, f: &Formula) -> bool {
        evaluate(g, f, ConstantAssignment::none(), EvalOptions::default()).unwrap()
    }

    fn path(n: usize) -> DynamicGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        DynamicGraph::from_edges(n, &edges).0
    }

    #[test]
    fn gamma_basics() {
        let g = build_gamma();
        assert!(ev(&DynamicGraph::from_edges(2, &[(0, 1)]).0, &g));
        assert!(ev(&path(3), &g));
        let (two, ids) = DynamicGraph::with_vertices(2);
        assert!(!ev(&two, &g));
        assert!(ev(&DynamicGraph::new(), &g));
        let gp = build_gamma_prime();
        let c = ConstantAssignment::pair(ids[0], ids[1]);
        assert!(evaluate(&two, &gp, c, EvalOptions::default()).unwrap());
    }

    #[test]
    fn built_formulas_print_and_parse() {
        for f in [
            build_gamma(),
            build_gamma_prime(),
            build_tau(1).unwrap(),
            build_tau(3).unwrap(),
            build_tau_prime(2).unwrap(),
        ] {
            assert_eq!(parse(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn tau_small_cases() {
        assert_eq!(build_tau(0), Err(MsoError::InvalidDepth(0)));
        assert!(ev(&path(1), &build_tau(1).unwrap()));
        assert!(!ev(&path(2), &build_tau(1).unwrap()));
        let k3 = DynamicGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).0;
        let t2 = build_tau(2).unwrap();
        assert!(ev(&path(3), &t2));
        assert!(!ev(&k3, &t2));
    }

    #[test]
    fn tau_on_paths() {
        for d in 1..=3 {
            let t = build_tau(d).unwrap();
            for n in 1..=7usize {
                let need = (usize::BITS - n.leading_zeros()) as usize;
                assert_eq!(ev(&path(n), &t), need <= d, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn tau_prime_uses_extra_edge() {
        let (two, ids) = DynamicGraph::with_vertices(2);
        let c = ConstantAssignment::pair(ids[0], ids[1]);
        let o = EvalOptions::default();
        assert!(evaluate(&two, &build_tau_prime(2).unwrap(), c, o).unwrap());
        assert!(!evaluate(&two, &build_tau_prime(1).unwrap(), c, o).unwrap());
        assert_eq!(build_tau_prime(2).unwrap().uses_constants(), (true, true));
        assert_eq!(build_tau(2).unwrap().uses_constants(), (false, false));
    }
}
