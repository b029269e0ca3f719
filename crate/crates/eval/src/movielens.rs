//! MovieLens-100k raw file parsing (`u.item`, `u.user`, `u.data`).

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Genre flag columns of `u.item`, in file order.
pub const GENRES: [&str; 19] = [
    "unknown",
    "Action",
    "Adventure",
    "Animation",
    "Children's",
    "Comedy",
    "Crime",
    "Documentary",
    "Drama",
    "Fantasy",
    "Film-Noir",
    "Horror",
    "Musical",
    "Mystery",
    "Romance",
    "Sci-Fi",
    "Thriller",
    "War",
    "Western",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("missing file {0}")]
    MissingFile(String),
    #[error("parse error in {file} line {line}: {reason}")]
    ParseError { file: String, line: usize, reason: String },
    #[error("reading {file}: {reason}")]
    Io { file: String, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Movie {
    pub id: String,
    pub title: String,
    /// ISO-8601 date, when the file has one.
    pub release: Option<String>,
    pub genres: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct User {
    pub id: String,
    pub age: i64,
    pub gender: String,
    pub occupation: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rating {
    pub user: String,
    pub item: String,
    pub value: u8,
    pub timestamp: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub movies: Vec<Movie>,
    pub users: Vec<User>,
    pub ratings: Vec<Rating>,
}

/// Counts of distinct users, distinct items and rating lines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub users: usize,
    pub items: usize,
    pub events: usize,
}

/// The files are Latin-1; every byte maps to the code point of equal value.
fn latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

fn read(dir: &Path, name: &str) -> Result<String, LoadError> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(LoadError::MissingFile(name.to_string()));
    }
    let bytes = std::fs::read(&path).map_err(|e| LoadError::Io { file: name.into(), reason: e.to_string() })?;
    Ok(latin1(&bytes))
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_err(file: &str, line: usize, reason: impl Into<String>) -> LoadError {
    LoadError::ParseError { file: file.into(), line, reason: reason.into() }
}

/// `01-Jan-1995` to `1995-01-01`.
pub fn iso_date(raw: &str) -> Option<String> {
    chrono::NaiveDate::parse_from_str(raw.trim(), "%d-%b-%Y")
        .ok()
        .map(|d| d.format("%Y-%m-%d").to_string())
}

pub fn parse_items(text: &str) -> Result<Vec<Movie>, LoadError> {
    let mut out = Vec::new();
    for (n, line) in lines(text) {
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 5 + GENRES.len() {
            return Err(parse_err("u.item", n, format!("expected 24 fields, found {}", fields.len())));
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(parse_err("u.item", n, "empty movie id"));
        }
        let mut genres = Vec::new();
        for (flag, name) in fields[5..].iter().zip(GENRES) {
            match flag.trim() {
                "1" => genres.push(name.to_string()),
                "0" => {}
                other => return Err(parse_err("u.item", n, format!("bad genre flag {other:?}"))),
            }
        }
        out.push(Movie {
            id: id.to_string(),
            title: fields[1].to_string(),
            release: iso_date(fields[2]),
            genres,
        });
    }
    Ok(out)
}

pub fn parse_users(text: &str) -> Result<Vec<User>, LoadError> {
    let mut out = Vec::new();
    for (n, line) in lines(text) {
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 5 {
            return Err(parse_err("u.user", n, format!("expected 5 fields, found {}", fields.len())));
        }
        let age = fields[1].trim().parse().map_err(|_| parse_err("u.user", n, "bad age"))?;
        out.push(User {
            id: fields[0].trim().to_string(),
            age,
            gender: fields[2].trim().to_string(),
            occupation: fields[3].trim().to_string(),
        });
    }
    Ok(out)
}

pub fn parse_ratings(text: &str) -> Result<Vec<Rating>, LoadError> {
    let mut out = Vec::new();
    for (n, line) in lines(text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err("u.data", n, format!("expected 4 fields, found {}", fields.len())));
        }
        let value: u8 = fields[2].trim().parse().map_err(|_| parse_err("u.data", n, "bad rating"))?;
        if !(1..=5).contains(&value) {
            return Err(parse_err("u.data", n, format!("rating {value} out of range")));
        }
        let timestamp = fields[3].trim().parse().map_err(|_| parse_err("u.data", n, "bad timestamp"))?;
        out.push(Rating { user: fields[0].trim().to_string(), item: fields[1].trim().to_string(), value, timestamp });
    }
    Ok(out)
}

pub fn load(dir: &Path) -> Result<Dataset, LoadError> {
    let movies = parse_items(&read(dir, "u.item")?)?;
    let users = parse_users(&read(dir, "u.user")?)?;
    let ratings = parse_ratings(&read(dir, "u.data")?)?;
    Ok(Dataset { movies, users, ratings })
}

/// Counts taken straight from the files, without the parser above: distinct
/// first fields of `u.user` and `u.item`, and non-blank lines of `u.data`.
pub fn raw_counts(dir: &Path) -> Result<Counts, LoadError> {
    let distinct = |name: &str| -> Result<usize, LoadError> {
        let text = read(dir, name)?;
        Ok(text
            .split('\n')
            .filter_map(|l| l.split('|').next().map(str::trim).filter(|s| !s.is_empty()))
            .collect::<BTreeSet<_>>()
            .len())
    };
    let users = distinct("u.user")?;
    let items = distinct("u.item")?;
    let events = read(dir, "u.data")?.split('\n').filter(|l| !l.trim().is_empty()).count();
    Ok(Counts { users, items, events })
}
