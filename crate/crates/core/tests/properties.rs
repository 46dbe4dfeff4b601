mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use hyperjoin_core::coco::CocoIndex;
use hyperjoin_core::engine::explain;
use hyperjoin_core::executor::{self, run_task};
use hyperjoin_core::io;
use hyperjoin_core::model::{Relation, Value};
use hyperjoin_core::optimizer::cost::{order_costs, partitioned_total};
use hyperjoin_core::optimizer::stats::{mask_of, RelationStats};
use hyperjoin_core::optimizer::{detect_rewrites, Statistics};
use hyperjoin_core::oracle;
use hyperjoin_core::{evaluate, EngineOptions, ExecOptions, HashFamily, PlanOptions, TaskId};
use proptest::prelude::*;

fn rows(arity: usize, max_rows: usize, domain: u64) -> impl Strategy<Value = Vec<Vec<Value>>> {
    prop::collection::vec(prop::collection::vec(0..domain, arity), 0..max_rows)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn engine_matches_oracle_on_random_queries(seed in any::<u64>(), n in 1usize..=4, log_p in 0u32..5) {
        let mut rng = common::rng(seed);
        let (query, cat) = common::random_query(&mut rng, n);
        let expect = oracle::evaluate(&query, &cat).unwrap();
        for rewrite in [true, false] {
            let mut opts = EngineOptions::new(1 << log_p);
            opts.plan.rewrite = rewrite;
            opts.exec.rewrite = rewrite;
            opts.exec.tuples = true;
            opts.exec.workers = 3;
            let eval = evaluate(&query, &cat, &opts).unwrap();
            prop_assert_eq!(eval.result.sorted_tuples().unwrap(), expect.clone());
        }
    }

    #[test]
    fn tasks_partition_the_output(seed in any::<u64>(), log_p in 1u32..6) {
        let q = hyperjoin_core::queries::ALL[0].parse();
        let g = hyperjoin_core::datagen::random_graph(40, 300, seed);
        let cat = common::self_join(&q, &g);
        let (plan, _) = explain(&q, &cat, &PlanOptions::new(1 << log_p)).unwrap();
        let hash = HashFamily::new(q.num_vars(), seed);
        let prepared = executor::prepare(&q, &cat, &plan, &hash, 2).unwrap();
        let opts = ExecOptions { tuples: true, ..ExecOptions::default() };
        let mut union = BTreeSet::new();
        let mut total = 0;
        for t in 0..plan.threads() {
            let task = TaskId::from_index(t, &plan.shares_in_order());
            let part = run_task(&q, &plan, &prepared, &task, &opts).unwrap();
            let rows = part.sorted_tuples().unwrap();
            total += rows.len();
            union.extend(rows);
        }
        prop_assert_eq!(total, union.len(), "tasks overlap");
        prop_assert_eq!(union.into_iter().collect::<Vec<_>>(), oracle::evaluate(&q, &cat).unwrap());
    }

    #[test]
    fn task_ids_roundtrip(exps in prop::collection::vec(0u32..4, 1..5), pick in any::<u64>()) {
        let shares: Vec<u32> = exps.iter().map(|&e| 1 << e).collect();
        let p: u64 = shares.iter().map(|&s| s as u64).product();
        let t = pick % p;
        let id = TaskId::from_index(t, &shares);
        prop_assert!(id.0.iter().zip(&shares).all(|(&c, &s)| c < s));
        prop_assert_eq!(id.index(&shares), t);
    }

    #[test]
    fn stats_invariants(data in rows(3, 80, 6)) {
        let rel = Arc::new(Relation::from_rows("R", 3, &data).unwrap().deduplicate());
        let stats = RelationStats::new(rel.clone());
        for attr in 0..3 {
            prop_assert!(stats.distinct(attr) <= stats.cardinality());
            let others: Vec<usize> = (0..3).filter(|&a| a != attr).collect();
            let none = stats.max_degree(attr, 0);
            let one = stats.max_degree(attr, mask_of([others[0]]));
            let both = stats.max_degree(attr, mask_of(others.clone()));
            prop_assert!(none >= one && one >= both);
            if !rel.is_empty() {
                prop_assert!(both >= 1);
            }
        }
    }

    #[test]
    fn unit_shares_cost_the_unpartitioned_total(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = common::rng(seed);
        let (query, cat) = common::random_query(&mut rng, n);
        let stats = Statistics::collect(&cat);
        let order: Vec<usize> = (0..n).collect();
        let costs = order_costs(&query, &stats, &order, &detect_rewrites(&query, &order));
        let unit = partitioned_total(&costs, &vec![1; n]);
        prop_assert!((unit - costs.total()).abs() <= 1e-9 * costs.total().max(1.0));
    }

    #[test]
    fn coco_offsets_are_well_formed(data in rows(3, 60, 5)) {
        let mut sorted = data.clone();
        sorted.sort();
        let idx = CocoIndex::build(&sorted.concat(), 3, false).unwrap();
        for r in 0..3 {
            let values = idx.values(r);
            let offsets = idx.level(r).offsets().unwrap().to_vec();
            prop_assert_eq!(offsets[0], 0);
            prop_assert_eq!(offsets.len(), values.len() + 1);
            prop_assert!(offsets.windows(2).all(|w| w[0] < w[1]));
            if r == 0 {
                prop_assert!(values.windows(2).all(|w| w[0] < w[1]));
            } else {
                let parent = idx.level(r - 1).offsets().unwrap().to_vec();
                for w in parent.windows(2) {
                    prop_assert!(values[w[0]..w[1]].windows(2).all(|p| p[0] < p[1]));
                }
            }
        }
    }

    #[test]
    fn csv_loads_as_a_set(data in rows(2, 50, 8), symmetrize in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let text: String = data.iter().map(|r| format!("{},{}\n", r[0], r[1])).collect();
        std::fs::write(&path, text).unwrap();
        let rel = io::load_csv(&path, 2, symmetrize).unwrap();
        let mut expect: BTreeSet<Vec<Value>> = data.iter().cloned().collect();
        if symmetrize {
            expect.extend(data.iter().map(|r| vec![r[1], r[0]]));
        }
        let got: Vec<Vec<Value>> = rel.rows().map(<[_]>::to_vec).collect();
        prop_assert_eq!(got.len(), expect.len());
        prop_assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), expect);
    }
}
