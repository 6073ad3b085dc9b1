use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use peanoseg::chain::{chain_from_potentials, sample_path_seeded};
use peanoseg::models::{build_hmc_cps, HmcParams, JointMatrix};
use peanoseg::scan::{build_context, build_scan};
use peanoseg_bench::{chain, noisy_stripes};

fn posterior_chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain_from_potentials");
    for len in [1 << 12, 1 << 14, 1 << 16] {
        for alphabet in [2, 4] {
            let ch = chain(alphabet, len);
            group.throughput(Throughput::Elements(len as u64));
            group.bench_with_input(
                BenchmarkId::new(format!("M={alphabet}"), len),
                &ch,
                |b, ch| b.iter(|| chain_from_potentials(ch).unwrap()),
            );
        }
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let post = chain_from_potentials(&chain(2, 1 << 14)).unwrap();
    c.bench_function("sample_path/N=16384", |b| {
        b.iter(|| sample_path_seeded(&post, 1))
    });
}

fn potentials(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_hmc_cps");
    let joint = JointMatrix::new(2, vec![0.45, 0.05, 0.05, 0.45]).unwrap();
    let params = HmcParams::new(joint.clone(), joint, vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
    for order in [6, 7] {
        let layout = build_scan(order).unwrap();
        let ctx = build_context(&layout);
        let (_, obs) = noisy_stripes(order, 0);
        let y = layout.to_scan_order(obs.values());
        group.bench_function(BenchmarkId::from_parameter(layout.len()), |b| {
            b.iter(|| build_hmc_cps(&params, &y, &layout, &ctx).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, posterior_chain, sampling, potentials);
criterion_main!(benches);
