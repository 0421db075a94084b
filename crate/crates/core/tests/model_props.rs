use std::collections::HashSet;

use proptest::prelude::*;
use symred::assignment::{act, PartialAssignment};
use symred::canon::canonical_form;
use symred::dist::{run_parallel, StackPolicy};
use symred::encode::{
    attach_set, cnf_to_model, kappa_of_assignment, model_symmetries, Cnf, SymmetryModel, ValueMode,
};
use symred::engine::{expand, run_sequential, PrefixPlan, RunStats, WorkItem};
use symred::oracle::orbit_count_exhaustive;
use symred::perm::{group_closure, orbit, orbit_with_transversal, GeneratorSet, Permutation};
use symred::wreath::WreathElement;

fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

/// Small CNFs; repeated clause shapes make symmetric instances common.
fn cnf() -> impl Strategy<Value = Cnf> {
    (1usize..=5).prop_flat_map(|nv| {
        let lit = (1..=nv as i64, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v });
        let clause = proptest::collection::vec(lit, 1..=3).prop_map(|mut c| {
            c.sort_unstable();
            c.dedup();
            c
        });
        proptest::collection::vec(clause, 0..=5).prop_map(move |cs| Cnf::new(nv, cs).unwrap())
    })
}

fn mode() -> impl Strategy<Value = ValueMode> {
    prop_oneof![Just(ValueMode::Global), Just(ValueMode::Phase)]
}

/// Model, a prefix (a permutation of some variables) and a seed for picking
/// group elements and assignments.
fn instance() -> impl Strategy<Value = (SymmetryModel, Vec<usize>, u64)> {
    (cnf(), mode(), any::<u64>()).prop_flat_map(|(f, mode, seed)| {
        let m = cnf_to_model(&f, mode).unwrap();
        let nv = f.num_vars;
        (
            Just(m),
            Just((0..nv).collect::<Vec<usize>>()).prop_shuffle(),
            0..=nv.min(4),
            Just(seed),
        )
            .prop_map(|(m, vars, k, seed)| (m, vars[..k].to_vec(), seed))
    })
}

fn group(m: &SymmetryModel) -> Vec<Permutation> {
    group_closure(&model_symmetries(m).unwrap(), 100_000).unwrap()
}

fn assignment(vars: &[usize], num_values: usize, seed: u64) -> PartialAssignment {
    PartialAssignment::from_pairs(
        vars.iter()
            .enumerate()
            .map(|(i, &u)| (u, ((seed >> (2 * i)) as usize) % num_values)),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn group_axioms(a in perm(8), b in perm(8), c in perm(8)) {
        let id = Permutation::identity(8);
        let ab = a.compose(&b).unwrap();
        prop_assert_eq!(ab.compose(&c).unwrap(), a.compose(&b.compose(&c).unwrap()).unwrap());
        prop_assert_eq!(a.compose(&id).unwrap(), a.clone());
        prop_assert_eq!(id.compose(&a).unwrap(), a.clone());
        prop_assert!(a.compose(&a.inverse()).unwrap().is_identity());
        for i in 0..8 {
            prop_assert_eq!(ab.apply(i), b.apply(a.apply(i)));
        }
    }

    #[test]
    fn transversal_witnesses_map_representative(
        gens in proptest::collection::vec(perm(9), 0..3),
        point in 0usize..9,
    ) {
        let g = GeneratorSet::new(9, gens).unwrap();
        let t = orbit_with_transversal(&g, point).unwrap();
        for &m in t.members() {
            prop_assert_eq!(t.witness(m).unwrap().apply(point), m);
        }
        let mut a = t.members().to_vec();
        let mut b = orbit(&g, point);
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn colors_separate_variables((m, _, _) in instance()) {
        let g = m.graph();
        let var: HashSet<usize> = m.var_vertices().iter().copied().collect();
        let var_colors: HashSet<u32> = var.iter().map(|&v| g.color(v)).collect();
        for v in 0..g.n() {
            if !var.contains(&v) {
                prop_assert!(!var_colors.contains(&g.color(v)));
            }
        }
    }

    #[test]
    fn attached_sets_of_images_are_isomorphic((m, w, seed) in instance()) {
        let gs = group(&m);
        let gamma = &gs[seed as usize % gs.len()];
        let image: Vec<usize> = w.iter().map(|&u| gamma.apply(u)).collect();
        let a = canonical_form(&attach_set(&m, &w).unwrap()).canonical;
        let b = canonical_form(&attach_set(&m, &image).unwrap()).canonical;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn assignment_keys_are_invariant((m, w, seed) in instance()) {
        let gs = group(&m);
        let gamma = &gs[seed as usize % gs.len()];
        let x = assignment(&w, m.num_values(), seed);
        let y = act(gamma, &x, m.mode(), m.num_vars(), m.num_values());
        prop_assert_eq!(kappa_of_assignment(&m, &x).unwrap().key, kappa_of_assignment(&m, &y).unwrap().key);
    }

    #[test]
    fn set_stabilizer_matches_brute_force((m, w, _) in instance()) {
        let set: HashSet<usize> = w.iter().copied().collect();
        let want: HashSet<Permutation> = group(&m)
            .into_iter()
            .filter(|g| w.iter().all(|&u| set.contains(&g.apply(u))))
            .collect();
        let got: HashSet<Permutation> =
            group_closure(&m.set_stabilizer(&w).unwrap(), 100_000).unwrap().into_iter().collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn action_laws((m, w, seed) in instance()) {
        let gs = group(&m);
        let g = &gs[seed as usize % gs.len()];
        let h = &gs[(seed >> 20) as usize % gs.len()];
        let (mode, nv, nr) = (m.mode(), m.num_vars(), m.num_values());
        let x = assignment(&w, nr, seed);
        let id = Permutation::identity(g.degree());
        prop_assert_eq!(act(&id, &x, mode, nv, nr), x.clone());
        let gh = g.compose(h).unwrap();
        prop_assert_eq!(
            act(&gh, &x, mode, nv, nr),
            act(h, &act(g, &x, mode, nv, nr), mode, nv, nr)
        );
        let mut dom: Vec<usize> = act(g, &x, mode, nv, nr).variables().collect();
        let mut mapped: Vec<usize> = x.variables().map(|u| g.apply(u)).collect();
        dom.sort_unstable();
        mapped.sort_unstable();
        prop_assert_eq!(dom, mapped);
    }

    #[test]
    fn one_output_per_orbit((m, prefix, _) in instance()) {
        let plan = PrefixPlan::build(&m, &prefix).unwrap();
        let out = run_sequential(&m, &plan).unwrap();
        let mut keys = HashSet::new();
        for x in &out.assignments {
            let mut dom: Vec<usize> = x.variables().collect();
            let mut u: Vec<usize> = prefix.clone();
            dom.sort_unstable();
            u.sort_unstable();
            prop_assert_eq!(dom, u);
            prop_assert!(keys.insert(kappa_of_assignment(&m, x).unwrap().key));
        }
        prop_assert_eq!(out.assignments.len(), orbit_count_exhaustive(&m, &prefix).unwrap());
        let again = run_sequential(&m, &plan).unwrap();
        prop_assert_eq!(again.assignments, out.assignments);
        let popped: u64 = out.stats.levels.iter().map(|l| l.popped).sum();
        let rejected: u64 = out.stats.levels.iter().map(|l| l.rejected_t1).sum();
        let accepted: u64 = out.stats.levels.iter().map(|l| l.accepted).sum();
        prop_assert_eq!(accepted, popped - rejected);
    }

    #[test]
    fn children_are_orbit_transversals((m, prefix, _) in instance()) {
        let plan = PrefixPlan::build(&m, &prefix).unwrap();
        let mut stats = RunStats::new(plan.depth());
        let mut stack = vec![WorkItem::root(&plan)];
        while let Some(item) = stack.pop() {
            let e = expand(&item, &plan, &m, &mut stats).unwrap();
            let Some(first) = e.children.first() else { continue };
            let aut = first.parent_aut.clone();
            let point = |p: usize, r: usize| match m.mode() {
                ValueMode::Global => p,
                ValueMode::Phase => m.pair_point(p, r),
            };
            let next = plan.level(item.level + 1);
            for r in 0..m.num_values() {
                for &p in next.candidates() {
                    let orb = orbit(&aut, point(p, r));
                    let hits = e
                        .children
                        .iter()
                        .filter(|c| {
                            let q = c.p.unwrap();
                            let s = c.assignment.get(q).unwrap();
                            (m.mode() == ValueMode::Phase || s == r) && orb.contains(&point(q, s))
                        })
                        .count();
                    prop_assert_eq!(hits, 1);
                }
            }
            stack.extend(e.children);
        }
    }

    #[test]
    fn wreath_action_is_a_right_action(
        pi in perm(4), pi2 in perm(4),
        s in proptest::collection::vec(perm(3), 4),
        s2 in proptest::collection::vec(perm(3), 4),
        vals in proptest::collection::vec(0usize..3, 4),
    ) {
        let g = WreathElement::new(pi, s).unwrap();
        let h = WreathElement::new(pi2, s2).unwrap();
        let x = PartialAssignment::from_pairs(vals.into_iter().enumerate()).unwrap();
        let gh = g.compose(&h).unwrap();
        prop_assert_eq!(gh.act_assignment(&x), h.act_assignment(&g.act_assignment(&x)));
        prop_assert_eq!(g.compose(&g.inverse()).unwrap(), WreathElement::identity(4, 3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parallel_runs_match_sequential((m, prefix, seed) in instance(), workers in 1usize..=4) {
        let plan = PrefixPlan::build(&m, &prefix).unwrap();
        let mut want = run_sequential(&m, &plan).unwrap().assignments;
        want.sort();
        let policy = if plan.depth() >= 2 && seed % 2 == 0 {
            StackPolicy::hierarchical(1 + (seed as usize / 2) % (plan.depth() - 1))
        } else {
            StackPolicy::master()
        };
        let out = run_parallel(&m, &plan, policy, workers).unwrap();
        prop_assert_eq!(out.assignments, want);
        prop_assert_eq!(out.stats.works, out.stats.pushes + 1);
    }
}
