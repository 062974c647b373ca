use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use iotsched::model::Instant;
use iotsched::scenario::{riot_eligible_satellites, satellite_name, synth_passes, SynthParams};
use iotsched::search::{init_population, Scenario};
use iotsched::CampaignSpec;

fn scenario(n_sats: usize, days: i64) -> Scenario {
    let start = Instant::from_epoch_seconds(1_727_740_800);
    let end = Instant::from_epoch_seconds(1_727_740_800 + days * 86_400);
    let params = SynthParams::default();
    let catalog = synth_passes(1, n_sats, (start, end), &params).unwrap();
    let riot = riot_eligible_satellites(&catalog, 5.0);
    let sats = (0..n_sats).map(satellite_name).collect();
    let spec = CampaignSpec::sqm_all_riot_some(params.site_id.clone(), (start, end), sats, &riot);
    Scenario::build(&catalog, &spec).unwrap()
}

fn population_evaluation(c: &mut Criterion) {
    let mut group = c.benchmark_group("assess_population");
    for (sats, days) in [(6, 3), (20, 7)] {
        let scn = scenario(sats, days);
        let pop = init_population(&scn, 400, &mut ChaCha8Rng::seed_from_u64(0));
        let label = format!("{sats}sats_{days}d");
        group.bench_with_input(BenchmarkId::new("sequential", &label), &pop, |b, pop| {
            b.iter(|| scn.assess_all(pop, false))
        });
        group.bench_with_input(BenchmarkId::new("parallel", &label), &pop, |b, pop| {
            b.iter(|| scn.assess_all(pop, true))
        });
    }
    group.finish();
}

criterion_group!(benches, population_evaluation);
criterion_main!(benches);
