use corepool::allocator::{allocate_separate, allocate_shared, validate_allocation, SeparateSdn};
use corepool::power::{separate_power, shared_power, ServerProfile};
use corepool::workload::{generate_workload, UtilRange, Workload, WorkloadSpec};
use proptest::prelude::*;

fn range() -> impl Strategy<Value = UtilRange> {
    (0.0f64..=100.0, 0.0f64..=100.0).prop_map(|(a, b)| UtilRange(a.min(b), a.max(b)))
}

fn spec() -> impl Strategy<Value = WorkloadSpec> {
    (0usize..40, range(), 0usize..40, range()).prop_map(
        |(sdr_count, sdr_range, sdn_count, sdn_range)| WorkloadSpec {
            sdr_count,
            sdr_range,
            sdn_count,
            sdn_range,
        },
    )
}

fn profile() -> impl Strategy<Value = ServerProfile> {
    (
        1usize..100,
        0.0f64..1000.0,
        prop::collection::vec((0.01f64..0.99, 0.0f64..500.0), 0..4),
    )
        .prop_map(|(cores, idle, mut mids)| {
            mids.sort_by(|a, b| a.0.total_cmp(&b.0));
            mids.dedup_by(|a, b| a.0 == b.0);
            let mut curve = vec![(0.0, idle)];
            let mut w = idle;
            for (l, dw) in mids {
                w += dw;
                curve.push((l, w));
            }
            curve.push((1.0, w + 100.0));
            ServerProfile {
                name: "random".into(),
                cores_per_server: cores,
                curve,
                notes: None,
            }
        })
}

fn lower_bound(w: &Workload) -> usize {
    ((w.total_utilization() - 1e-9) / 100.0).ceil().max(0.0) as usize
}

proptest! {
    #[test]
    fn generated_utilizations_within_range(spec in spec(), seed in any::<u64>()) {
        let w = generate_workload(&spec, seed).unwrap();
        prop_assert_eq!(w.sdr().count(), spec.sdr_count);
        prop_assert_eq!(w.sdn().count(), spec.sdn_count);
        prop_assert!(w.sdr().all(|p| spec.sdr_range.contains(p.utilization)));
        prop_assert!(w.sdn().all(|p| spec.sdn_range.contains(p.utilization)));
        let ids: Vec<u32> = w.processes.iter().map(|p| p.id).collect();
        prop_assert_eq!(ids, (0..w.processes.len() as u32).collect::<Vec<_>>());
    }

    #[test]
    fn generation_is_pure(spec in spec(), seed in any::<u64>()) {
        prop_assert_eq!(generate_workload(&spec, seed).unwrap(), generate_workload(&spec, seed).unwrap());
    }

    #[test]
    fn aggregate_matches_sum(spec in spec(), seed in any::<u64>()) {
        let w = generate_workload(&spec, seed).unwrap();
        let naive: f64 = w.processes.iter()
            .filter(|p| p.kind == corepool::ProcessKind::Sdn)
            .map(|p| p.utilization)
            .sum();
        let agg = w.aggregate_sdn();
        prop_assert!((agg - naive).abs() <= 1e-9 * naive.abs().max(1.0));
    }

    #[test]
    fn allocations_are_valid(spec in spec(), seed in any::<u64>()) {
        let w = generate_workload(&spec, seed).unwrap();
        let shared = allocate_shared(&w).unwrap();
        prop_assert_eq!(validate_allocation(&shared, &w), vec![]);
        for mode in [SeparateSdn::PerProcess, SeparateSdn::Fluid] {
            let (sdr, sdn) = allocate_separate(&w, mode).unwrap();
            prop_assert_eq!(validate_allocation(&sdr, &w), vec![]);
            prop_assert_eq!(validate_allocation(&sdn, &w), vec![]);
            prop_assert!(shared.core_count() <= sdr.core_count() + sdn.core_count());
        }
    }

    #[test]
    fn shared_core_count_formula(spec in spec(), seed in any::<u64>()) {
        let w = generate_workload(&spec, seed).unwrap();
        let shared = allocate_shared(&w).unwrap();
        let (sdr, _) = allocate_separate(&w, SeparateSdn::Fluid).unwrap();
        let lb = lower_bound(&w);
        prop_assert!(shared.core_count() >= lb);
        prop_assert_eq!(shared.core_count(), sdr.core_count().max(lb));
    }

    #[test]
    fn allocation_is_deterministic(spec in spec(), seed in any::<u64>()) {
        let w = generate_workload(&spec, seed).unwrap();
        prop_assert_eq!(allocate_shared(&w).unwrap(), allocate_shared(&w.clone()).unwrap());
    }

    #[test]
    fn power_monotone_in_load(p in profile(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        p.validate().unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(p.power_at_load(lo).unwrap() <= p.power_at_load(hi).unwrap());
    }

    #[test]
    fn power_exact_at_knots(p in profile()) {
        for &(l, w) in &p.curve {
            prop_assert!((p.power_at_load(l).unwrap() - w).abs() <= 1e-9 * w.max(1.0));
        }
    }

    #[test]
    fn adding_load_never_lowers_power(spec in spec(), seed in any::<u64>(), p in profile(), core in any::<prop::sample::Index>(), extra in 0.0f64..=100.0) {
        let w = generate_workload(&spec, seed).unwrap();
        let mut a = allocate_shared(&w).unwrap();
        prop_assume!(!a.cores.is_empty());
        let before = shared_power(&a, &p).total_watts;
        let n = a.cores.len();
        let c = &mut a.cores[core.index(n)];
        c.total = (c.total + extra).min(100.0);
        prop_assert!(shared_power(&a, &p).total_watts >= before - 1e-9);
    }

    #[test]
    fn report_server_counts(spec in spec(), seed in any::<u64>(), p in profile()) {
        let w = generate_workload(&spec, seed).unwrap();
        let a = allocate_shared(&w).unwrap();
        let r = shared_power(&a, &p);
        prop_assert_eq!(r.servers_used, a.core_count().div_ceil(p.cores_per_server));
        if r.servers_used > 0 {
            prop_assert!(r.total_watts >= r.servers_used as f64 * p.idle_watts() - 1e-9);
        }
        let (sdr, sdn) = allocate_separate(&w, SeparateSdn::default()).unwrap();
        let s = separate_power(&sdr, &sdn, &p);
        prop_assert_eq!(
            s.servers_used,
            sdr.core_count().div_ceil(p.cores_per_server) + sdn.core_count().div_ceil(p.cores_per_server)
        );
    }
}
