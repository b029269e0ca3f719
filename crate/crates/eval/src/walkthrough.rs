//! The movie recommender walkthrough: domain configuration and ingestion
//! through the platform's public operations.

use std::collections::BTreeMap;

use serde::Serialize;
use uptrendz_core::catalog::{AttributeValue, NewInteraction};
use uptrendz_core::ids::{DomainId, EntityTypeId};
use uptrendz_core::registry::{
    ActorMode, AlgorithmSpec, AttributeKind, AttributeSpec, Audience, ContextKind, EntityKind, Explicitness,
    HybridComponent, InteractionSelection, InteractionTarget, NewEntityType, NewInteractionType, NewScenario,
    PostFilter,
};
use uptrendz_core::{Error, Platform};

use crate::movielens::{Counts, Dataset, Rating};

pub const DOMAIN_NAME: &str = "movielens";
pub const MOVIE: &str = "movie";
pub const USER: &str = "user";
pub const RATING: &str = "rating";

pub const SIMILAR_MOVIES: &str = "similar-movies";
pub const POPULAR_HORROR: &str = "popular-horror-movies";
pub const BASED_ON_RATINGS: &str = "movies-based-on-ratings";
pub const HYBRID: &str = "hybrid-movies";
pub const USERS_FOR_MOVIE: &str = "users-for-movie";
/// Unfiltered most-popular baseline used for the quality comparison.
pub const POPULAR: &str = "popular-movies";

/// The five walkthrough scenarios, in walkthrough order.
pub const WALKTHROUGH: [&str; 5] = [SIMILAR_MOVIES, POPULAR_HORROR, BASED_ON_RATINGS, HYBRID, USERS_FOR_MOVIE];

pub const CF_WEIGHT: f64 = 0.7;
pub const CBF_WEIGHT: f64 = 0.3;
pub const NEIGHBORS_K: usize = 50;

fn scenario(id: &str, name: &str, target: &str, audience: Audience, context: ContextKind, algorithm: AlgorithmSpec) -> NewScenario {
    NewScenario {
        id: Some(id.into()),
        name: name.into(),
        target_entity_type: EntityTypeId::new(target),
        audience,
        context,
        algorithm,
        post_filters: Vec::new(),
        echo_attributes: Vec::new(),
    }
}

/// Creates the movie domain with its schemas, the rating interaction type
/// and all scenarios.
pub fn configure(platform: &Platform) -> Result<DomainId, Error> {
    configure_named(platform, DOMAIN_NAME)
}

/// [`configure`] under another display name.
pub fn configure_named(platform: &Platform, name: &str) -> Result<DomainId, Error> {
    let d = platform.create_system_domain(name)?.id;
    let id = d.as_str();
    platform.define_entity_schema(
        id,
        NewEntityType {
            entity_kind: EntityKind::Item,
            name: MOVIE.into(),
            attributes: vec![
                AttributeSpec::new("title", AttributeKind::FreeTextEnglish).required(),
                AttributeSpec::new("genres", AttributeKind::CategoricalMulti),
                AttributeSpec::new("release", AttributeKind::Date),
            ],
        },
    )?;
    platform.define_entity_schema(
        id,
        NewEntityType {
            entity_kind: EntityKind::User,
            name: USER.into(),
            attributes: vec![
                AttributeSpec::new("age", AttributeKind::NumericInteger),
                AttributeSpec::new("gender", AttributeKind::CategoricalSingle),
                AttributeSpec::new("occupation", AttributeKind::CategoricalSingle),
            ],
        },
    )?;
    platform.define_interaction_type(
        id,
        NewInteractionType {
            name: RATING.into(),
            explicitness: Explicitness::Explicit,
            default_weight: 1.0,
            actor_mode: ActorMode::RegisteredOnly,
            track_timestamp: true,
            target: InteractionTarget::UserItem,
            target_entity_type: EntityTypeId::new(MOVIE),
        },
    )?;
    let ratings = InteractionSelection::of([RATING]);
    platform.create_scenario(
        id,
        scenario(
            SIMILAR_MOVIES,
            "similar movies",
            MOVIE,
            Audience::Both,
            ContextKind::ItemId,
            AlgorithmSpec::ContentBased { cbf_attributes: ["title".to_string()].into() },
        ),
    )?;
    let mut horror = scenario(
        POPULAR_HORROR,
        "popular horror movies",
        MOVIE,
        Audience::Both,
        ContextKind::None,
        AlgorithmSpec::MostPopular { selection: ratings.clone() },
    );
    horror.post_filters = vec![PostFilter::Contains { attribute: "genres".into(), value: "Horror".into() }];
    horror.echo_attributes = vec!["title".into(), "genres".into()];
    platform.create_scenario(id, horror)?;
    platform.create_scenario(
        id,
        scenario(
            BASED_ON_RATINGS,
            "movies based on ratings",
            MOVIE,
            Audience::Registered,
            ContextKind::UserId,
            AlgorithmSpec::Collaborative { selection: ratings.clone(), neighbors_k: NEIGHBORS_K },
        ),
    )?;
    platform.create_scenario(
        id,
        scenario(
            HYBRID,
            "ratings and similar movies",
            MOVIE,
            Audience::Registered,
            ContextKind::ItemId,
            AlgorithmSpec::Hybrid {
                hybrid_components: vec![
                    HybridComponent { scenario_id: BASED_ON_RATINGS.into(), weight: CF_WEIGHT },
                    HybridComponent { scenario_id: SIMILAR_MOVIES.into(), weight: CBF_WEIGHT },
                ],
            },
        ),
    )?;
    platform.create_scenario(
        id,
        scenario(
            USERS_FOR_MOVIE,
            "user recommender for a given movie",
            USER,
            Audience::Both,
            ContextKind::ItemId,
            AlgorithmSpec::UserForItem { selection: ratings.clone() },
        ),
    )?;
    platform.create_scenario(
        id,
        scenario(POPULAR, "popular movies", MOVIE, Audience::Both, ContextKind::None, AlgorithmSpec::MostPopular {
            selection: ratings,
        }),
    )?;
    Ok(d)
}

pub fn movie_values(title: &str, genres: &[String], release: Option<&str>) -> BTreeMap<String, AttributeValue> {
    let mut values = BTreeMap::from([
        ("title".to_string(), AttributeValue::Text(title.to_string())),
        ("genres".to_string(), AttributeValue::List(genres.to_vec())),
    ]);
    if let Some(r) = release {
        values.insert("release".into(), AttributeValue::Text(r.to_string()));
    }
    values
}

/// Upserts every movie and user.
pub fn ingest_catalog(platform: &Platform, d: &DomainId, data: &Dataset) -> Result<(), Error> {
    for m in &data.movies {
        platform.upsert_entity(d.as_str(), MOVIE, &m.id, movie_values(&m.title, &m.genres, m.release.as_deref()))?;
    }
    for u in &data.users {
        let values = BTreeMap::from([
            ("age".to_string(), AttributeValue::Integer(u.age)),
            ("gender".to_string(), AttributeValue::Text(u.gender.clone())),
            ("occupation".to_string(), AttributeValue::Text(u.occupation.clone())),
        ]);
        platform.upsert_entity(d.as_str(), USER, &u.id, values)?;
    }
    Ok(())
}

pub fn rating_event(r: &Rating) -> NewInteraction {
    let at = chrono::DateTime::from_timestamp(r.timestamp, 0).unwrap_or_default();
    NewInteraction::by_user(RATING, &r.user, &r.item).value(f64::from(r.value)).at(at)
}

/// Records ratings in the given order; returns the last acknowledged sequence.
pub fn ingest_ratings<'a>(
    platform: &Platform,
    d: &DomainId,
    ratings: impl IntoIterator<Item = &'a Rating>,
) -> Result<u64, Error> {
    let mut last = 0;
    for r in ratings {
        last = platform.record_interaction(d.as_str(), rating_event(r))?.sequence;
    }
    Ok(last)
}

/// Counts as seen by the platform after ingestion.
pub fn summary(platform: &Platform, d: &DomainId) -> Result<Counts, Error> {
    let snapshot = platform.snapshot(d.as_str())?;
    Ok(Counts {
        users: snapshot.entity_count_of(&EntityTypeId::new(USER)),
        items: snapshot.entity_count_of(&EntityTypeId::new(MOVIE)),
        events: snapshot.events().len(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Loaded {
    pub domain: DomainId,
    pub summary: Counts,
}

/// Configures the domain and ingests the whole dataset.
pub fn load_all(platform: &Platform, data: &Dataset) -> Result<Loaded, Error> {
    let domain = configure(platform)?;
    ingest_catalog(platform, &domain, data)?;
    ingest_ratings(platform, &domain, &data.ratings)?;
    let summary = summary(platform, &domain)?;
    Ok(Loaded { domain, summary })
}
