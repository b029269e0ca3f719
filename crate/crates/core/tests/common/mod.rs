#![allow(dead_code)]

use std::collections::BTreeMap;

use serde_json::Value;
use uptrendz_core::catalog::{AttributeValue, NewInteraction};
use uptrendz_core::ids::{DomainId, EntityTypeId};
use uptrendz_core::registry::{
    ActorMode, AlgorithmSpec, AttributeKind, AttributeSpec, Audience, ContextKind, EntityKind, Explicitness,
    HybridComponent, InteractionSelection, InteractionTarget, NewEntityType, NewInteractionType, NewScenario,
    PostFilter,
};
use uptrendz_core::Platform;

pub fn values(v: Value) -> BTreeMap<String, AttributeValue> {
    serde_json::from_value(v).expect("attribute map")
}

pub fn movie_type() -> NewEntityType {
    NewEntityType {
        entity_kind: EntityKind::Item,
        name: "movie".into(),
        attributes: vec![
            AttributeSpec::new("title", AttributeKind::FreeTextEnglish).required(),
            AttributeSpec::new("plot", AttributeKind::FreeTextEnglish),
            AttributeSpec::new("genres", AttributeKind::CategoricalMulti),
            AttributeSpec::new("release", AttributeKind::Date),
            AttributeSpec::new("year", AttributeKind::NumericInteger),
        ],
    }
}

pub fn user_type() -> NewEntityType {
    NewEntityType {
        entity_kind: EntityKind::User,
        name: "user".into(),
        attributes: vec![
            AttributeSpec::new("age", AttributeKind::NumericInteger),
            AttributeSpec::new("gender", AttributeKind::CategoricalSingle),
            AttributeSpec::new("occupation", AttributeKind::CategoricalSingle),
        ],
    }
}

pub fn rating_type() -> NewInteractionType {
    NewInteractionType {
        name: "rating".into(),
        explicitness: Explicitness::Explicit,
        default_weight: 1.0,
        actor_mode: ActorMode::RegisteredOnly,
        track_timestamp: true,
        target: InteractionTarget::UserItem,
        target_entity_type: EntityTypeId::new("movie"),
    }
}

pub fn view_type() -> NewInteractionType {
    NewInteractionType {
        name: "view".into(),
        explicitness: Explicitness::Implicit,
        default_weight: 0.5,
        actor_mode: ActorMode::Both,
        track_timestamp: false,
        target: InteractionTarget::UserItem,
        target_entity_type: EntityTypeId::new("movie"),
    }
}

pub fn scenario(id: &str, target: &str, audience: Audience, context: ContextKind, algorithm: AlgorithmSpec) -> NewScenario {
    NewScenario {
        id: Some(id.into()),
        name: id.replace('-', " "),
        target_entity_type: EntityTypeId::new(target),
        audience,
        context,
        algorithm,
        post_filters: Vec::new(),
        echo_attributes: Vec::new(),
    }
}

pub fn ratings() -> InteractionSelection {
    InteractionSelection::of(["rating"])
}

/// A small movie domain with every walkthrough scenario configured.
pub fn movie_domain(platform: &Platform) -> DomainId {
    let d = platform.create_system_domain("movielens").unwrap().id;
    let id = d.as_str();
    platform.define_entity_schema(id, movie_type()).unwrap();
    platform.define_entity_schema(id, user_type()).unwrap();
    platform.define_interaction_type(id, rating_type()).unwrap();
    platform.define_interaction_type(id, view_type()).unwrap();
    let both = InteractionSelection::of(["rating", "view"]);
    platform
        .create_scenario(
            id,
            scenario(
                "similar-movies",
                "movie",
                Audience::Both,
                ContextKind::ItemId,
                AlgorithmSpec::ContentBased { cbf_attributes: ["title".to_string(), "plot".to_string()].into() },
            ),
        )
        .unwrap();
    let mut horror = scenario(
        "popular-horror-movies",
        "movie",
        Audience::Both,
        ContextKind::None,
        AlgorithmSpec::MostPopular { selection: both.clone() },
    );
    horror.post_filters = vec![PostFilter::Contains { attribute: "genres".into(), value: "Horror".into() }];
    horror.echo_attributes = vec!["title".into(), "genres".into()];
    platform.create_scenario(id, horror).unwrap();
    platform
        .create_scenario(
            id,
            scenario("popular-movies", "movie", Audience::Both, ContextKind::None, AlgorithmSpec::MostPopular { selection: both }),
        )
        .unwrap();
    platform
        .create_scenario(
            id,
            scenario(
                "movies-based-on-ratings",
                "movie",
                Audience::Registered,
                ContextKind::UserId,
                AlgorithmSpec::Collaborative { selection: ratings(), neighbors_k: 50 },
            ),
        )
        .unwrap();
    platform
        .create_scenario(
            id,
            scenario(
                "hybrid-movies",
                "movie",
                Audience::Registered,
                ContextKind::ItemId,
                AlgorithmSpec::Hybrid {
                    hybrid_components: vec![
                        HybridComponent { scenario_id: "movies-based-on-ratings".into(), weight: 0.7 },
                        HybridComponent { scenario_id: "similar-movies".into(), weight: 0.3 },
                    ],
                },
            ),
        )
        .unwrap();
    platform
        .create_scenario(
            id,
            scenario(
                "users-for-movie",
                "user",
                Audience::Both,
                ContextKind::ItemId,
                AlgorithmSpec::UserForItem { selection: ratings() },
            ),
        )
        .unwrap();
    d
}

pub const MOVIES: &[(&str, &str, &[&str])] = &[
    ("1", "Toy Story (1995)", &["Animation", "Children's", "Comedy"]),
    ("2", "GoldenEye (1995)", &["Action", "Adventure", "Thriller"]),
    ("3", "Four Rooms (1995)", &["Thriller"]),
    ("4", "Night of the Living Dead (1968)", &["Horror"]),
    ("5", "Dracula: Dead and Loving It (1995)", &["Comedy", "Horror"]),
    ("6", "Toy Soldiers (1991)", &["Action"]),
    ("7", "The Evil Dead (1981)", &["Horror"]),
];

/// Movies, three users and a handful of ratings.
pub fn populate(platform: &Platform, d: &DomainId) {
    let id = d.as_str();
    for (mid, title, genres) in MOVIES {
        platform
            .upsert_entity(id, "movie", mid, values(serde_json::json!({"title": title, "genres": genres})))
            .unwrap();
    }
    for u in ["196", "186", "22"] {
        platform
            .upsert_entity(id, "user", u, values(serde_json::json!({"age": 30, "gender": "M", "occupation": "writer"})))
            .unwrap();
    }
    for (u, m, r) in [
        ("196", "1", 5.0),
        ("196", "2", 3.0),
        ("196", "4", 4.0),
        ("186", "1", 4.0),
        ("186", "4", 5.0),
        ("186", "5", 2.0),
        ("22", "2", 1.0),
        ("22", "7", 5.0),
    ] {
        platform.record_interaction(id, NewInteraction::by_user("rating", u, m).value(r)).unwrap();
    }
}
