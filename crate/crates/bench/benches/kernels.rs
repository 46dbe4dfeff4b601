use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hyperjoin_bench::sorted_view;
use hyperjoin_core::intersect::{intersect_count, search_from};
use hyperjoin_core::{SearchConfig, SearchStrategy, Steps};

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    for len in [16usize, 512, 65_536] {
        let view = sorted_view(len, 8, 3);
        let probes: Vec<u64> = sorted_view(256, view[len - 1] / 256 + 1, 5);
        for strategy in SearchStrategy::ALL {
            group.bench_with_input(
                BenchmarkId::new(format!("{strategy:?}"), len),
                &view,
                |b, view| {
                    b.iter(|| {
                        let mut steps = Steps::new();
                        let mut from = 0;
                        for &x in &probes {
                            from = search_from(view, from, black_box(x), strategy, &mut steps);
                        }
                        from
                    })
                },
            );
        }
    }
    group.finish();
}

fn multiway(c: &mut Criterion) {
    let mut group = c.benchmark_group("intersect");
    let long = sorted_view(100_000, 4, 11);
    for short_len in [100usize, 10_000, 100_000] {
        let short = sorted_view(short_len, 400_000 / short_len as u64, 13);
        let third = sorted_view(50_000, 8, 17);
        let views: [&[u64]; 3] = [&long, &short, &third];
        group.bench_with_input(BenchmarkId::new("3-way", short_len), &views, |b, views| {
            b.iter(|| intersect_count(black_box(views), SearchConfig::default(), &mut Steps::new()))
        });
    }
    group.finish();
}

criterion_group!(benches, search, multiway);
criterion_main!(benches);
