mod common;

use common::l2_rel;
use stokes_treecode::engine::{parallel_velocity, treecode_velocity, Treecode};
use stokes_treecode::kernel::contracted_direct_velocity;
use stokes_treecode::testcases::{cube_particles, sphere_particles, CubeCaseConfig, SphereCaseConfig};
use stokes_treecode::{KernelSelection, ParticleSet, TreecodeParams};

fn params(order: usize, theta: f64, leaf: usize, kernels: KernelSelection) -> TreecodeParams {
    TreecodeParams {
        order,
        theta,
        leaf_capacity: leaf,
        shrink: false,
        kernels,
        workers: 1,
    }
}

fn direct(set: &ParticleSet, kernels: KernelSelection) -> Vec<[f64; 3]> {
    contracted_direct_velocity(set, kernels, 0..set.len()).unwrap()
}

#[test]
fn tiny_theta_degenerates_to_the_direct_sum() {
    let set = cube_particles(&CubeCaseConfig::new(2000, 41).with_stresslets());
    for shrink in [false, true] {
        let p = TreecodeParams { shrink, ..params(4, 1e-9, 40, KernelSelection::BOTH) };
        let tree = treecode_velocity(&set, &p).unwrap();
        assert_eq!(tree.stats.farfield_evals, 0);
        let e = l2_rel(&direct(&set, KernelSelection::BOTH), &tree.velocities);
        assert!(e <= 1e-13, "E = {e:e}");
    }
}

#[test]
fn single_leaf_is_bit_identical_to_direct() {
    let set = cube_particles(&CubeCaseConfig::new(500, 42).with_stresslets());
    for kernels in [KernelSelection::STOKESLET, KernelSelection::STRESSLET, KernelSelection::BOTH] {
        let tree = treecode_velocity(&set, &params(6, 0.5, 2000, kernels)).unwrap();
        assert_eq!(tree.velocities, direct(&set, kernels));
    }
}

#[test]
fn worker_count_does_not_change_a_single_bit() {
    let set = cube_particles(&CubeCaseConfig::new(100_000, 43));
    let base = params(6, 0.5, 2000, KernelSelection::STOKESLET);
    let one = treecode_velocity(&set, &base).unwrap();
    let four = parallel_velocity(&set, &TreecodeParams { workers: 4, ..base }).unwrap();
    assert!(one.velocities.iter().zip(&four.velocities).all(|(a, b)| a.map(f64::to_bits) == b.map(f64::to_bits)));
    assert_eq!(one.stats.farfield_evals, four.stats.farfield_evals);
    assert_eq!(one.stats.direct_pairs, four.stats.direct_pairs);
    // Unequal segment lengths and more workers than needed.
    let small = cube_particles(&CubeCaseConfig::new(3001, 44).with_stresslets());
    let sp = params(3, 0.6, 64, KernelSelection::BOTH);
    let reference = treecode_velocity(&small, &sp).unwrap().velocities;
    for workers in [2, 3, 7] {
        let got = parallel_velocity(&small, &TreecodeParams { workers, ..sp }).unwrap().velocities;
        assert_eq!(got, reference, "workers = {workers}");
    }
}

#[test]
fn smaller_theta_visits_more_clusters() {
    let set = cube_particles(&CubeCaseConfig::new(20_000, 45));
    let tc = |theta| Treecode::new(&set, &params(2, theta, 100, KernelSelection::STOKESLET)).unwrap().evaluate(1).stats;
    let visits: Vec<u64> = [0.8, 0.5, 0.2].into_iter().map(|t| tc(t).visited_clusters).collect();
    assert!(visits[0] <= visits[1] && visits[1] <= visits[2], "{visits:?}");
    let s = tc(0.5);
    assert!(s.farfield_evals + s.direct_evals >= 20_000);
}

#[test]
fn high_accuracy_regime() {
    let set = cube_particles(&CubeCaseConfig::new(20_000, 46).with_stresslets());
    let p = params(10, 0.2, 500, KernelSelection::BOTH);
    let tree = treecode_velocity(&set, &p).unwrap();
    let e = l2_rel(&direct(&set, KernelSelection::BOTH), &tree.velocities);
    assert!(tree.stats.farfield_evals > 0);
    assert!(e < 1e-9, "E = {e:e}");
}

#[test]
fn sphere_errors_follow_order_and_theta() {
    let set = sphere_particles(&SphereCaseConfig::new(4, 0));
    let d = direct(&set, KernelSelection::BOTH);
    let err = |order, theta| {
        let p = TreecodeParams { shrink: true, ..params(order, theta, 200, KernelSelection::BOTH) };
        l2_rel(&d, &treecode_velocity(&set, &p).unwrap().velocities)
    };
    let e0 = err(0, 0.5);
    let e10 = err(10, 0.5);
    assert!(e0 / e10 > 1e3, "{e0:e} / {e10:e}");
    let (a, b, c) = (err(6, 0.2), err(6, 0.5), err(6, 0.8));
    assert!(a < b && b < c, "{a:e} {b:e} {c:e}");
}

#[test]
fn velocities_come_back_in_input_order() {
    let set = cube_particles(&CubeCaseConfig::new(4000, 47));
    let p = params(8, 0.3, 50, KernelSelection::STOKESLET);
    let tree = treecode_velocity(&set, &p).unwrap();
    let d = direct(&set, KernelSelection::STOKESLET);
    for (a, b) in d.iter().zip(&tree.velocities) {
        assert!(common::rel_diff_vec(*b, *a) < 1e-4);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    let set = cube_particles(&CubeCaseConfig::new(10, 48));
    for theta in [0.0, 1.0, 2.0] {
        assert!(treecode_velocity(&set, &params(6, theta, 10, KernelSelection::STOKESLET)).is_err());
    }
    // Stresslets requested without dipoles.
    assert!(treecode_velocity(&set, &params(6, 0.5, 10, KernelSelection::BOTH)).is_err());
}
