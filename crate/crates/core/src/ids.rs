use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(id: impl AsRef<str>) -> Self {
                Self(Arc::from(id.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifier of a system-level domain.
    DomainId
);
string_id!(
    /// Identifier of an entity type (one item-level domain or a user type).
    EntityTypeId
);
string_id!(ScenarioId);

/// The party that produced an interaction.
///
/// Registered user ids and anonymous session tokens live in disjoint
/// namespaces; `key()` renders them with distinct prefixes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorId {
    User(Arc<str>),
    Session(Arc<str>),
}

impl ActorId {
    pub fn user(id: impl AsRef<str>) -> Self {
        ActorId::User(Arc::from(id.as_ref()))
    }

    pub fn session(token: impl AsRef<str>) -> Self {
        ActorId::Session(Arc::from(token.as_ref()))
    }

    pub fn is_registered(&self) -> bool {
        matches!(self, ActorId::User(_))
    }

    pub fn raw(&self) -> &str {
        match self {
            ActorId::User(id) | ActorId::Session(id) => id,
        }
    }

    /// Prefix-tagged form, e.g. `u:196` or `s:abc`.
    pub fn key(&self) -> String {
        match self {
            ActorId::User(id) => format!("u:{id}"),
            ActorId::Session(id) => format!("s:{id}"),
        }
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Lowercase URL-safe slug: runs of anything outside `[a-z0-9]` collapse to `-`.
pub fn slugify(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_dash = false;
    for ch in name.chars().flat_map(char::to_lowercase) {
        if ch.is_ascii_alphanumeric() {
            if pending_dash && !out.is_empty() {
                out.push('-');
            }
            pending_dash = false;
            out.push(ch);
        } else {
            pending_dash = true;
        }
    }
    out
}

pub fn is_url_token(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= 128
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_' || b == b'.')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slugify("movielens"), "movielens");
        assert_eq!(slugify("Startup Founding"), "startup-founding");
        assert_eq!(slugify("  innovation--idea!! "), "innovation-idea");
        assert_eq!(slugify("!!!"), "");
    }

    #[test]
    fn actor_namespaces_are_disjoint() {
        let u = ActorId::user("abc");
        let s = ActorId::session("abc");
        assert_ne!(u, s);
        assert_ne!(u.key(), s.key());
        assert!(u.is_registered());
        assert!(!s.is_registered());
    }
}
