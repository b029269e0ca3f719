mod common;

use std::sync::Arc;
use std::time::Duration;

use common::*;
use serde_json::json;
use uptrendz_core::catalog::{AttributeValue, NewInteraction};
use uptrendz_core::engines::{most_popular, AffinityWeights};
use uptrendz_core::gateway::{
    run_scenario, serve_isolated, Gateway, GatewayOptions, LoadProfile, RecommendationRequest as Req, ServeError,
};
use uptrendz_core::ids::{DomainId, EntityTypeId};
use uptrendz_core::{Exec, Platform};

fn setup() -> (Arc<Platform>, DomainId) {
    let p = Arc::new(Platform::in_memory());
    let d = movie_domain(&p);
    populate(&p, &d);
    (p, d)
}

fn gateway(p: &Arc<Platform>) -> Gateway {
    Gateway::new(p.clone(), GatewayOptions { workers_per_domain: 2, queue_depth: 8, cpu_permits: 1 })
}

#[test]
fn similar_movies() {
    let (p, d) = setup();
    let g = gateway(&p);
    let r = g.recommend(d.as_str(), "similar-movies", Req::for_user("196").item("1").k(5)).unwrap();
    assert!(!r.fallback_used);
    // "toy" links 6, the shared year links 2, 3 and 5
    let mut ids: Vec<&str> = r.items.iter().map(|i| i.id.as_str()).collect();
    assert_eq!(ids[0], "6");
    ids.sort();
    assert_eq!(ids, ["2", "3", "5", "6"]);
    assert!(r.items.windows(2).all(|w| w[0].score >= w[1].score));
    let r = g.recommend(d.as_str(), "similar-movies", Req::for_user("196").item("1").k(2)).unwrap();
    assert_eq!(r.items.len(), 2);
}

#[test]
fn cold_start_user_falls_back_to_popular() {
    let (p, d) = setup();
    let g = gateway(&p);
    let r = g.recommend(d.as_str(), "movies-based-on-ratings", Req::for_user("999")).unwrap();
    assert!(r.fallback_used);
    let snapshot = p.snapshot(d.as_str()).unwrap();
    let weights = AffinityWeights::resolve(&snapshot.config, &ratings()).unwrap();
    let mp = most_popular(&snapshot, &EntityTypeId::new("movie"), &weights, &[], 10, Exec::Sequential).unwrap();
    let ids: Vec<&str> = r.items.iter().map(|i| i.id.as_str()).collect();
    assert_eq!(ids, mp.ids());
}

#[test]
fn known_user_gets_collaborative_list() {
    let (p, d) = setup();
    let g = gateway(&p);
    let r = g.recommend(d.as_str(), "movies-based-on-ratings", Req::for_user("196")).unwrap();
    assert!(!r.fallback_used);
    let ids: Vec<&str> = r.items.iter().map(|i| i.id.as_str()).collect();
    assert!(!ids.contains(&"1") && !ids.contains(&"2") && !ids.contains(&"4"));
    assert!(ids.contains(&"5") && ids.contains(&"7"));
}

#[test]
fn audience_rules() {
    let (p, d) = setup();
    let g = gateway(&p);
    let id = d.as_str();
    let e = g.recommend(id, "movies-based-on-ratings", Req::for_session("s-1")).unwrap_err();
    assert!(matches!(e, ServeError::AudienceViolation(_)));
    assert_eq!(e.status(), 400);
    let e = g.recommend(id, "movies-based-on-ratings", Req::default()).unwrap_err();
    assert!(matches!(e, ServeError::AudienceViolation(_)));
    let e = g.recommend(id, "popular-movies", Req::default()).unwrap_err();
    assert!(matches!(e, ServeError::AudienceViolation(_)));
    assert!(g.recommend(id, "popular-movies", Req::for_session("s-1")).is_ok());
    assert!(g.recommend(id, "popular-movies", Req::for_user("196")).is_ok());
}

#[test]
fn request_errors() {
    let (p, d) = setup();
    let g = gateway(&p);
    let id = d.as_str();
    let e = g.recommend(id, "similar-movies", Req::for_user("196")).unwrap_err();
    assert!(matches!(e, ServeError::MissingContext(_)));
    assert_eq!(e.status(), 400);
    let e = g.recommend(id, "nope", Req::for_user("196")).unwrap_err();
    assert_eq!(e.status(), 404);
    assert_eq!(e.kind(), "UnknownScenario");
    assert_eq!(g.recommend("nope-9", "nope", Req::for_user("196")).unwrap_err().status(), 404);
    for k in [0, 101] {
        let e = g.recommend(id, "popular-movies", Req::for_user("196").k(k)).unwrap_err();
        assert_eq!(e.status(), 400);
    }
    assert_eq!(g.recommend(id, "popular-movies", Req::for_user("196").k(100)).unwrap().items.len(), 5);
    let e = g.recommend(id, "similar-movies", Req::for_user("196").item("404")).unwrap_err();
    assert_eq!(e.status(), 404);
}

#[test]
fn horror_filter_and_attribute_echo() {
    let (p, d) = setup();
    let g = gateway(&p);
    let r = g.recommend(d.as_str(), "popular-horror-movies", Req::for_session("s-1")).unwrap();
    let ids: Vec<&str> = r.items.iter().map(|i| i.id.as_str()).collect();
    assert_eq!(ids, ["4", "7", "5"]);
    for item in &r.items {
        let attributes = item.attributes.as_ref().unwrap();
        assert!(attributes.contains_key("title"));
        match &attributes["genres"] {
            AttributeValue::List(g) => assert!(g.iter().any(|x| x == "Horror")),
            other => panic!("{other:?}"),
        }
    }
    let plain = g.recommend(d.as_str(), "popular-movies", Req::for_session("s-1")).unwrap();
    assert!(plain.items.iter().all(|i| i.attributes.is_none()));
}

#[test]
fn users_for_movie() {
    let (p, d) = setup();
    let g = gateway(&p);
    let id = d.as_str();
    let r = g.recommend(id, "users-for-movie", Req::for_session("s").item("4")).unwrap();
    let ids: Vec<&str> = r.items.iter().map(|i| i.id.as_str()).collect();
    assert_eq!(ids, ["22"]);
    // nobody rated movie 3: empty list, not an error
    let r = g.recommend(id, "users-for-movie", Req::for_session("s").item("3")).unwrap();
    assert!(r.items.is_empty());
    assert!(!r.fallback_used);
}

#[test]
fn hybrid_combines_components() {
    let (p, d) = setup();
    let g = gateway(&p);
    let r = g.recommend(d.as_str(), "hybrid-movies", Req::for_user("196").item("1")).unwrap();
    assert!(!r.fallback_used);
    assert!(!r.items.is_empty());
    assert!(r.items.iter().all(|i| (0.0..=1.0 + 1e-12).contains(&i.score)));
    let cold = g.recommend(d.as_str(), "hybrid-movies", Req::for_user("999").item("1")).unwrap();
    assert!(cold.fallback_used);
}

#[test]
fn responses_are_deterministic_and_confined() {
    let (p, d) = setup();
    let g = gateway(&p);
    let snapshot = p.snapshot(d.as_str()).unwrap();
    for (scenario, req) in [
        ("similar-movies", Req::for_user("196").item("1")),
        ("popular-movies", Req::for_user("196")),
        ("movies-based-on-ratings", Req::for_user("186")),
        ("hybrid-movies", Req::for_user("22").item("2")),
        ("users-for-movie", Req::for_user("196").item("1")),
    ] {
        let mut a = g.recommend(d.as_str(), scenario, req.clone()).unwrap();
        let mut b = g.recommend(d.as_str(), scenario, req.clone()).unwrap();
        a.latency_ms = 0.0;
        b.latency_ms = 0.0;
        assert_eq!(a, b);
        let seq = run_scenario(&snapshot, scenario, &req, Exec::Sequential).unwrap();
        let par = run_scenario(&snapshot, scenario, &req, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        let target = &snapshot.config.scenario(scenario).unwrap().target_entity_type;
        assert!(a.items.iter().all(|i| snapshot.entity(target, &i.id).is_some()));
    }
}

#[test]
fn read_your_writes() {
    let (p, d) = setup();
    let g = gateway(&p);
    let id = d.as_str();
    for i in 0..20 {
        let ack = p.record_interaction(id, NewInteraction::by_session("view", &format!("s{i}"), "3")).unwrap();
        let r = g.recommend(id, "popular-movies", Req::for_session("probe").k(100)).unwrap();
        assert!(r.as_of_sequence >= ack.sequence);
        let score = r.items.iter().find(|x| x.id == "3").map(|x| x.score).unwrap();
        assert!((score - 0.5 * f64::from(i + 1)).abs() < 1e-9);
    }
}

#[test]
fn full_queue_is_busy_and_other_domains_are_unaffected() {
    let (p, a) = setup();
    let b = p.create_system_domain("second").unwrap().id;
    p.define_entity_schema(b.as_str(), movie_type()).unwrap();
    p.define_interaction_type(b.as_str(), view_type()).unwrap();
    p.create_scenario(
        b.as_str(),
        scenario(
            "popular",
            "movie",
            uptrendz_core::registry::Audience::Both,
            uptrendz_core::registry::ContextKind::None,
            uptrendz_core::registry::AlgorithmSpec::MostPopular {
                selection: uptrendz_core::registry::InteractionSelection::of(["view"]),
            },
        ),
    )
    .unwrap();
    p.upsert_entity(b.as_str(), "movie", "1", values(json!({"title": "x"}))).unwrap();
    p.record_interaction(b.as_str(), NewInteraction::by_session("view", "s", "1")).unwrap();

    let g = Gateway::new(p.clone(), GatewayOptions { workers_per_domain: 1, queue_depth: 1, cpu_permits: 1 });
    let (release_tx, release_rx) = crossbeam_channel::bounded::<()>(0);
    // occupies A's only worker until released
    g.submit(a.as_str(), "popular-movies", Req::for_session("s"), move |_| {
        let _ = release_rx.recv();
    })
    .unwrap();
    std::thread::sleep(Duration::from_millis(50));
    g.submit(a.as_str(), "popular-movies", Req::for_session("s"), |_| {}).unwrap();
    let e = g.submit(a.as_str(), "popular-movies", Req::for_session("s"), |_| {}).unwrap_err();
    assert_eq!(e, ServeError::Busy);
    assert_eq!(e.status(), 429);
    for _ in 0..5 {
        let r = g.recommend(b.as_str(), "popular", Req::for_session("s")).unwrap();
        assert_eq!(r.items.len(), 1);
    }
    release_tx.send(()).unwrap();
    // A recovers once its backlog drains
    let recovered = (0..200).any(|_| {
        let ok = g.recommend(a.as_str(), "popular-movies", Req::for_session("s")).is_ok();
        if !ok {
            std::thread::sleep(Duration::from_millis(5));
        }
        ok
    });
    assert!(recovered);
}

#[test]
fn load_harness_counts_statuses() {
    let (p, d) = setup();
    let g = gateway(&p);
    let reports = serve_isolated(
        &g,
        &[LoadProfile {
            domain: d.to_string(),
            scenario: "popular-movies".into(),
            requests: vec![Req::for_session("s"), Req::for_user("196").k(0)],
            clients: 2,
            count: Some(20),
            busy_backoff: Duration::from_millis(1),
            think_time: Duration::ZERO,
        }],
    );
    assert_eq!(reports[0].ok, 20);
    assert_eq!(reports[0].client_errors, 20);
    assert_eq!(reports[0].busy, 0);
    assert_eq!(reports[0].server_errors, 0);
    assert_eq!(reports[0].latencies_ms.len(), 20);
}
