//! The exact cluster engines: tree/graph enumeration, the Ursell function
//! and kernel, and the tree dominator Q.
//!
//! ```text
//! cargo run --example cluster_identities
//! ```

use pathgibbs::cluster::{
    enumerate_connected_graphs, enumerate_trees, q_full, ursell_function, ursell_kernel,
};
use pathgibbs::configuration::{Configuration, MarkedPoint};
use pathgibbs::potential::{
    stability_constant_bound, PathPairPotential, ScalarPotential, TailPotential,
};

fn cfg(xs: &[f64]) -> Configuration {
    Configuration::new(
        xs.iter()
            .map(|&x| MarkedPoint::with_zero_mark(vec![x], 8))
            .collect(),
    )
    .unwrap()
}

fn main() -> pathgibbs::Result<()> {
    for n in 2..=8usize {
        println!(
            "labeled trees on {n} vertices: {} (= {n}^{})",
            enumerate_trees(n)?.count(),
            n - 2
        );
    }
    for n in 2..=5usize {
        println!(
            "connected graphs on {n} vertices: {}",
            enumerate_connected_graphs(n)?.count()
        );
    }

    let scalar = ScalarPotential {
        hard_core_r: 1.0,
        tail: TailPotential::LennardJones {
            a: 4.0,
            b: 2.0,
            shifted: false,
        },
        a0: 2.5,
    };
    let phi = PathPairPotential::new(scalar)?;
    let beta = 1.0;
    let b_phi = stability_constant_bound(&scalar, 1)?;

    // The kernel with a single-point first argument reproduces the Ursell
    // function of the whole configuration.
    let gamma = cfg(&[0.0, 1.4, 2.1, 3.6]);
    let k = ursell_function(&gamma, &phi, beta)?;
    let head = cfg(&[0.0]);
    let kbar = ursell_kernel(&head, &gamma.without(0), &phi, beta)?;
    println!(
        "k(gamma)          = {:+.12e}  ({} connected graphs)",
        k.value, k.terms_evaluated
    );
    println!(
        "kbar(x, gamma\\x)  = {:+.12e}  ({} recursion terms)",
        kbar.value, kbar.terms_evaluated
    );

    // Q dominates the kernel on split configurations.
    let split = cfg(&[0.0, 1.4]);
    let rest = cfg(&[2.1, 3.6]);
    let kb = ursell_kernel(&split, &rest, &phi, beta)?;
    let q = q_full(&split, &rest, &phi, beta, b_phi)?;
    println!(
        "|kbar(gamma, xi)| = {:.6e} <= Q(gamma, xi) = {:.6e}  (B_phi = {b_phi:.4})",
        kb.value.abs(),
        q.value
    );
    Ok(())
}
