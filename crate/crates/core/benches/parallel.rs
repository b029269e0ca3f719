use std::collections::BTreeMap;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uptrendz_core::catalog::{AttributeValue, NewInteraction};
use uptrendz_core::gateway::{run_scenario, RecommendationRequest};
use uptrendz_core::ids::{DomainId, EntityTypeId};
use uptrendz_core::registry::{
    ActorMode, AlgorithmSpec, AttributeKind, AttributeSpec, Audience, ContextKind, EntityKind,
    Explicitness, InteractionSelection, InteractionTarget, NewEntityType, NewInteractionType, NewScenario,
};
use uptrendz_core::{Exec, Platform};

const USERS: usize = 1500;
const ITEMS: usize = 1200;
const RATINGS: usize = 60_000;
const WORDS: &[&str] = &[
    "love", "war", "night", "city", "dead", "story", "girl", "man", "house", "king", "dream", "star", "river",
    "ghost", "game", "road", "blood", "summer", "winter", "secret", "island", "heart", "fire", "shadow",
];

fn scenario(id: &str, target: &str, context: ContextKind, algorithm: AlgorithmSpec) -> NewScenario {
    NewScenario {
        id: Some(id.into()),
        name: id.into(),
        target_entity_type: EntityTypeId::new(target),
        audience: Audience::Both,
        context,
        algorithm,
        post_filters: Vec::new(),
        echo_attributes: Vec::new(),
    }
}

fn build() -> (Platform, DomainId) {
    let p = Platform::in_memory();
    let d = p.create_system_domain("bench").unwrap().id;
    let id = d.as_str();
    p.define_entity_schema(
        id,
        NewEntityType {
            entity_kind: EntityKind::Item,
            name: "movie".into(),
            attributes: vec![AttributeSpec::new("title", AttributeKind::FreeTextEnglish)],
        },
    )
    .unwrap();
    p.define_entity_schema(id, NewEntityType { entity_kind: EntityKind::User, name: "user".into(), attributes: vec![] })
        .unwrap();
    p.define_interaction_type(
        id,
        NewInteractionType {
            name: "rating".into(),
            explicitness: Explicitness::Explicit,
            default_weight: 1.0,
            actor_mode: ActorMode::RegisteredOnly,
            track_timestamp: false,
            target: InteractionTarget::UserItem,
            target_entity_type: EntityTypeId::new("movie"),
        },
    )
    .unwrap();
    let ratings = InteractionSelection::of(["rating"]);
    p.create_scenario(id, scenario("mp", "movie", ContextKind::None, AlgorithmSpec::MostPopular { selection: ratings.clone() }))
        .unwrap();
    p.create_scenario(
        id,
        scenario("cf", "movie", ContextKind::UserId, AlgorithmSpec::Collaborative { selection: ratings.clone(), neighbors_k: 50 }),
    )
    .unwrap();
    p.create_scenario(id, scenario("ufi", "user", ContextKind::ItemId, AlgorithmSpec::UserForItem { selection: ratings }))
        .unwrap();
    p.create_scenario(
        id,
        scenario(
            "cbf",
            "movie",
            ContextKind::ItemId,
            AlgorithmSpec::ContentBased { cbf_attributes: ["title".to_string()].into() },
        ),
    )
    .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..ITEMS {
        let title: Vec<&str> = (0..rng.gen_range(2..6)).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
        let values = BTreeMap::from([("title".to_string(), AttributeValue::Text(title.join(" ")))]);
        p.upsert_entity(id, "movie", &i.to_string(), values).unwrap();
    }
    for u in 0..USERS {
        p.upsert_entity(id, "user", &u.to_string(), BTreeMap::new()).unwrap();
    }
    for _ in 0..RATINGS {
        // skewed item popularity
        let item = (rng.gen::<f64>().powi(2) * ITEMS as f64) as usize;
        let user = rng.gen_range(0..USERS);
        let event = NewInteraction::by_user("rating", &user.to_string(), &item.to_string())
            .value(f64::from(rng.gen_range(1..=5u8)));
        p.record_interaction(id, event).unwrap();
    }
    (p, d)
}

fn modes() -> Vec<(&'static str, Exec)> {
    let mut modes = vec![("sequential", Exec::Sequential)];
    if cfg!(feature = "parallel") {
        modes.push(("parallel", Exec::Parallel));
    }
    modes
}

fn engines(c: &mut Criterion) {
    let (p, d) = build();
    let snapshot = p.snapshot(d.as_str()).unwrap();
    let cases = [
        ("most_popular", "mp", RecommendationRequest::for_session("s")),
        ("collaborative", "cf", RecommendationRequest::for_user("17")),
        ("users_for_item", "ufi", RecommendationRequest::for_session("s").item("3")),
        ("content_based", "cbf", RecommendationRequest::for_session("s").item("3")),
    ];
    for (name, scenario_id, req) in cases {
        let mut group = c.benchmark_group(name);
        for (mode, exec) in modes() {
            group.bench_with_input(BenchmarkId::from_parameter(mode), &exec, |b, exec| {
                b.iter(|| black_box(run_scenario(&snapshot, scenario_id, &req, *exec).unwrap()))
            });
        }
        group.finish();
    }

    let mut group = c.benchmark_group("collaborative_batch_32_users");
    let users: Vec<RecommendationRequest> = (0..32).map(|u| RecommendationRequest::for_user(u.to_string())).collect();
    for (mode, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(mode), &exec, |b, exec| {
            b.iter(|| {
                exec.map(&users, |req| run_scenario(&snapshot, "cf", req, Exec::Sequential).unwrap().list.len())
            })
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = engines
}
criterion_main!(benches);
