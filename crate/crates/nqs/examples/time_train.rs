fn main() {
    use nqs::vmc::{train, VmcConfig};
    use nqs::exact::lanczos::{HamiltonianKind, HamiltonianSpec};
    let t0 = std::time::Instant::now();
    for l in [9usize, 11] {
        let mut med = vec![];
        for kind in [HamiltonianKind::Tfim { bx: 1.0 }, HamiltonianKind::Xxz { jz: -0.2 }] {
            let h = HamiltonianSpec::new(kind, l).unwrap();
            let mut alphas = vec![];
            for seed in [3u64, 7, 11] {
                let cfg = VmcConfig {
                    n_chains: 8, sweeps_per_sample: 2, n_samples: 4000, burn_in: 200,
                    learning_rate: 0.05, n_iterations: 40, seed, init_scale: 0.05,
                    grow_stage_iters: 10_000,
                    ..Default::default()
                };
                let out = train(&h, 6, &cfg).unwrap();
                alphas.push(out.fitted_alpha_p.unwrap());
            }
            alphas.sort_by(|a,b| a.partial_cmp(b).unwrap());
            med.push(alphas[1]);
            println!("L={l} {kind:?}: median {:.3} all {:.3?}", alphas[1], alphas);
        }
        println!("L={l}: TFIM {:.3} > XXZ {:.3}: {}", med[0], med[1], med[0] > med[1]);
    }
    println!("total {:.0}s", t0.elapsed().as_secs_f64());
}
