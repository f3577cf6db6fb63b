use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unipolar::bits::random_bits;
use unipolar::channel::{quantize, BmsChannel};
use unipolar::gf::GfField;
use unipolar::polar::{build_spec, polar_transform, sc_decode, Kernel, Pin, ProcessingOrder};
use unipolar::rs::RsCode;
use unipolar::scheme1::{BoundaryPolicy, StaircaseCode, StaircaseParams};
use unipolar::scheme2::{align, AlignedBlockSpec};

fn transform(c: &mut Criterion) {
    let mut g = c.benchmark_group("transform");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [8u32, 12, 16] {
        let u = random_bits(&mut rng, 1 << n);
        g.throughput(Throughput::Elements(1 << n));
        g.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| b.iter(|| polar_transform(black_box(u))));
    }
    g.finish();
}

fn sc(c: &mut Criterion) {
    let mut g = c.benchmark_group("sc_decode");
    let ch = BmsChannel::bsc(0.11).unwrap();
    let sampler = ch.sampler();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [8u32, 10, 12] {
        let spec = build_spec(&ch, n, 0.4).unwrap();
        let pins: Vec<Pin> = spec
            .info_mask()
            .into_iter()
            .map(|info| if info { Pin::Info } else { Pin::Frozen(0) })
            .collect();
        let llrs: Vec<f64> = (0..1usize << n).map(|_| sampler.llr(0, &mut rng)).collect();
        g.throughput(Throughput::Elements(1 << n));
        for kernel in [Kernel::Exact, Kernel::MinSum] {
            g.bench_with_input(BenchmarkId::new(format!("{kernel:?}"), n), &llrs, |b, llrs| {
                b.iter(|| sc_decode(black_box(llrs), &pins, &ProcessingOrder::Natural, kernel).unwrap())
            });
        }
    }
    g.finish();
}

fn rs_erasure(c: &mut Criterion) {
    let field = GfField::new(8).unwrap();
    let code = RsCode::new(field.clone(), 100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let msg: Vec<_> = (0..100).map(|_| field.element(rng.random_range(0..256)).unwrap()).collect();
    let cw = code.encode(&msg).unwrap();
    let received: Vec<_> = cw
        .iter()
        .enumerate()
        .map(|(i, &s)| if i % 5 == 0 { None } else { Some(s) })
        .collect();
    c.bench_function("rs_erasure_decode_256_100", |b| {
        b.iter(|| code.erasure_decode(black_box(&received)).unwrap())
    });
}

fn staircase(c: &mut Criterion) {
    let params = StaircaseParams::new(6, 4, 24).unwrap();
    let code = StaircaseCode::new(params, BoundaryPolicy::FreezeAll).unwrap();
    let ch = BmsChannel::bsc(0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let info = random_bits(&mut rng, code.info_len());
    let x = code.encode(&info).unwrap();
    let y = ch.sampler().transmit(&x, &mut rng);
    c.bench_function("staircase_encode_n6_k4", |b| b.iter(|| code.encode(black_box(&info)).unwrap()));
    c.bench_function("staircase_decode_n6_k4", |b| b.iter(|| code.decode(black_box(&y), &ch)));
}

fn aligned(c: &mut Criterion) {
    let chans = [BmsChannel::bec(0.5).unwrap(), BmsChannel::bsc(0.11).unwrap()];
    let base = AlignedBlockSpec::base(&chans, 8, 0.3).unwrap();
    let spec = align(&base, &base, 1, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let info = random_bits(&mut rng, spec.info_len());
    let y = chans[1].sampler().transmit(&spec.encode(&info).unwrap(), &mut rng);
    c.bench_function("aligned_decode_512", |b| b.iter(|| spec.decode(black_box(&y), Kernel::Exact).unwrap()));
}

fn quantizer(c: &mut Criterion) {
    let ch = BmsChannel::bawgnc(0.97865).unwrap();
    c.bench_function("quantize_bawgnc_t372", |b| b.iter(|| quantize(black_box(&ch), 372)));
}

criterion_group!(benches, transform, sc, rs_erasure, staircase, aligned, quantizer);
criterion_main!(benches);
