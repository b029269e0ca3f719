//! The control and data planes over all system domains.
//!
//! Each domain owns one writer lock and one atomically swapped state. Writes
//! validate against the current state, append to the domain's log, build the
//! successor state and publish it in a single swap, so a reader sees either
//! the state before a write or the state after it. Reads never take a lock.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use arc_swap::ArcSwap;
use chrono::Utc;
use parking_lot::{Mutex, RwLock};

use crate::catalog::log::{read_log, Corruption, Durability, LogRecord, LogWriter, LOG_FILE};
use crate::catalog::{
    check_id, encoded_size, validate_interaction, validate_values, Ack, AttributeValue, CatalogError,
    DomainState, EntityRecord, NewInteraction, Snapshot, MAX_RECORD_BYTES,
};
use crate::ids::{slugify, DomainId, EntityTypeId};
use crate::registry::{
    self, check_entity_type, check_interaction_type, check_scenario, check_schema_extension,
    storage_namespace, AlgorithmSpec, AttributeSpec, DomainConfig, EntitySchema, InteractionTypeConfig,
    NewEntityType, NewInteractionType, NewScenario, RegistryError, ScenarioConfig, SystemDomain, Violation,
};
use crate::Error;

pub const CONFIG_FILE: &str = "config.json";

struct Writer {
    dir: Option<PathBuf>,
    log: Option<LogWriter>,
}

struct Domain {
    state: ArcSwap<DomainState>,
    writer: Mutex<Writer>,
}

/// What `open` found in one domain's log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryReport {
    pub domain: DomainId,
    pub records: u64,
    pub corruption: Option<Corruption>,
}

/// Records every storage path touched, for isolation checks.
#[derive(Clone, Default)]
pub struct AccessTrace(Arc<Mutex<Vec<PathBuf>>>);

impl AccessTrace {
    fn touch(&self, path: &Path) {
        self.0.lock().push(path.to_path_buf());
    }

    pub fn paths(&self) -> Vec<PathBuf> {
        self.0.lock().clone()
    }

    pub fn clear(&self) {
        self.0.lock().clear();
    }
}

pub struct Platform {
    root: Option<PathBuf>,
    durability: Durability,
    domains: RwLock<BTreeMap<DomainId, Arc<Domain>>>,
    create_lock: Mutex<()>,
    next_id: AtomicU64,
    trace: Option<AccessTrace>,
}

impl Platform {
    /// A platform without persistence.
    pub fn in_memory() -> Self {
        Self {
            root: None,
            durability: Durability::Flush,
            domains: RwLock::new(BTreeMap::new()),
            create_lock: Mutex::new(()),
            next_id: AtomicU64::new(0),
            trace: None,
        }
    }

    /// Opens (or initializes) a data directory and replays every domain
    /// found under `<root>/ns/`.
    pub fn open(root: impl Into<PathBuf>, durability: Durability) -> Result<(Self, Vec<RecoveryReport>), Error> {
        Self::open_traced(root, durability, None)
    }

    pub fn open_traced(
        root: impl Into<PathBuf>,
        durability: Durability,
        trace: Option<AccessTrace>,
    ) -> Result<(Self, Vec<RecoveryReport>), Error> {
        let root = root.into();
        let ns_root = root.join("ns");
        fs::create_dir_all(&ns_root).map_err(storage)?;
        let platform = Self {
            root: Some(root),
            durability,
            domains: RwLock::new(BTreeMap::new()),
            create_lock: Mutex::new(()),
            next_id: AtomicU64::new(0),
            trace,
        };
        let mut dirs: Vec<PathBuf> = fs::read_dir(&ns_root)
            .map_err(storage)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(CONFIG_FILE).is_file())
            .collect();
        dirs.sort();
        let mut reports = Vec::new();
        for dir in dirs {
            let (state, report, valid_len) = platform.replay_dir(&dir)?;
            let log = LogWriter::open(&dir.join(LOG_FILE), valid_len, durability).map_err(storage)?;
            let id = state.config.domain.id.clone();
            platform.bump_counter(&id);
            platform.domains.write().insert(
                id,
                Arc::new(Domain {
                    state: ArcSwap::from_pointee(state),
                    writer: Mutex::new(Writer { dir: Some(dir), log: Some(log) }),
                }),
            );
            reports.push(report);
        }
        Ok((platform, reports))
    }

    fn bump_counter(&self, id: &DomainId) {
        if let Some(n) = id.as_str().rsplit('-').next().and_then(|n| n.parse::<u64>().ok()) {
            self.next_id.fetch_max(n, Ordering::SeqCst);
        }
    }

    fn touch(&self, path: &Path) {
        if let Some(t) = &self.trace {
            t.touch(path);
        }
    }

    fn domain(&self, id: &str) -> Result<Arc<Domain>, RegistryError> {
        self.domains
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| RegistryError::UnknownDomain(DomainId::new(id)))
    }

    pub fn domain_ids(&self) -> Vec<DomainId> {
        self.domains.read().keys().cloned().collect()
    }

    pub fn storage_dir(&self, id: &DomainId) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(storage_namespace(id)))
    }

    // ---- control plane ----

    pub fn create_system_domain(&self, name: &str) -> Result<SystemDomain, Error> {
        registry::check_display_name(name)?;
        let _guard = self.create_lock.lock();
        self.ensure_unique_name(name)?;
        let base = match slugify(name) {
            s if s.is_empty() => "domain".to_string(),
            s => s,
        };
        let id = DomainId::new(format!("{base}-{}", self.next_id.fetch_add(1, Ordering::SeqCst) + 1));
        let domain = SystemDomain {
            storage_namespace: storage_namespace(&id),
            id,
            name: name.to_string(),
            created_at: Utc::now(),
        };
        self.install_domain(DomainConfig::new(domain.clone()))?;
        Ok(domain)
    }

    fn ensure_unique_name(&self, name: &str) -> Result<(), RegistryError> {
        let taken = self
            .domains
            .read()
            .values()
            .any(|d| d.state.load().config.domain.name == name);
        if taken {
            return Err(RegistryError::DuplicateName(name.to_string()));
        }
        Ok(())
    }

    fn install_domain(&self, config: DomainConfig) -> Result<(), Error> {
        let id = config.domain.id.clone();
        let (dir, log) = match &self.root {
            Some(root) => {
                let dir = root.join(&config.domain.storage_namespace);
                fs::create_dir_all(&dir).map_err(storage)?;
                self.write_config(&dir, &config)?;
                let path = dir.join(LOG_FILE);
                self.touch(&path);
                let log = LogWriter::open(&path, 0, self.durability).map_err(storage)?;
                (Some(dir), Some(log))
            }
            None => (None, None),
        };
        let state = DomainState::new(Arc::new(config));
        self.domains.write().insert(
            id,
            Arc::new(Domain { state: ArcSwap::from_pointee(state), writer: Mutex::new(Writer { dir, log }) }),
        );
        Ok(())
    }

    fn write_config(&self, dir: &Path, config: &DomainConfig) -> Result<(), Error> {
        let path = dir.join(CONFIG_FILE);
        let tmp = dir.join(format!("{CONFIG_FILE}.tmp"));
        self.touch(&path);
        fs::write(&tmp, config.to_document()).map_err(storage)?;
        fs::rename(&tmp, &path).map_err(storage)?;
        Ok(())
    }

    /// Applies a configuration change under the domain's writer lock.
    fn update_config<T>(
        &self,
        domain: &str,
        change: impl FnOnce(&DomainConfig) -> Result<(DomainConfig, T), RegistryError>,
    ) -> Result<T, Error> {
        let domain = self.domain(domain)?;
        let writer = domain.writer.lock();
        let current = domain.state.load_full();
        let (config, out) = change(&current.config)?;
        if let Some(dir) = &writer.dir {
            self.write_config(dir, &config)?;
        }
        let mut next = (*current).clone();
        next.set_config(Arc::new(config));
        domain.state.store(Arc::new(next));
        Ok(out)
    }

    pub fn define_entity_schema(&self, domain: &str, new: NewEntityType) -> Result<EntitySchema, Error> {
        self.update_config(domain, |config| {
            let schema = check_entity_type(config, &new)?;
            let mut next = config.clone();
            next.entity_types.insert(schema.entity_type_id.clone(), schema.clone());
            Ok((next, schema))
        })
    }

    /// Appends optional attributes to an existing schema.
    pub fn extend_entity_schema(
        &self,
        domain: &str,
        entity_type: &str,
        attributes: Vec<AttributeSpec>,
    ) -> Result<EntitySchema, Error> {
        self.update_config(domain, |config| {
            let schema = config
                .schema(entity_type)
                .ok_or_else(|| RegistryError::UnknownEntityType(entity_type.to_string()))?;
            let extended = check_schema_extension(schema, &attributes)?;
            let mut next = config.clone();
            next.entity_types.insert(extended.entity_type_id.clone(), extended.clone());
            Ok((next, extended))
        })
    }

    pub fn define_interaction_type(
        &self,
        domain: &str,
        new: NewInteractionType,
    ) -> Result<InteractionTypeConfig, Error> {
        self.update_config(domain, |config| {
            let ty = check_interaction_type(config, &new)?;
            let mut next = config.clone();
            next.interaction_types.insert(ty.name.clone(), ty.clone());
            Ok((next, ty))
        })
    }

    pub fn create_scenario(&self, domain: &str, new: NewScenario) -> Result<ScenarioConfig, Error> {
        self.update_config(domain, |config| {
            let scenario = check_scenario(config, &new)?;
            let mut next = config.clone();
            next.scenarios.insert(scenario.scenario_id.clone(), scenario.clone());
            Ok((next, scenario))
        })
    }

    /// Full configuration readback.
    pub fn domain_config(&self, domain: &str) -> Result<Arc<DomainConfig>, Error> {
        Ok(self.domain(domain)?.state.load().config.clone())
    }

    pub fn configs(&self) -> Vec<Arc<DomainConfig>> {
        self.domains.read().values().map(|d| d.state.load().config.clone()).collect()
    }

    pub fn validate_registry(&self) -> Vec<Violation> {
        let configs = self.configs();
        registry::validate_registry(configs.iter().map(|c| &**c))
    }

    /// Loads a declarative configuration document (the readback format).
    /// Domains that already exist with the same id are left untouched;
    /// everything else is created through the regular validated operations.
    pub fn apply_document(&self, doc: &DomainConfig) -> Result<bool, Error> {
        let id = doc.domain.id.clone();
        if self.domains.read().contains_key(&id) {
            return Ok(false);
        }
        if !crate::ids::is_url_token(id.as_str()) {
            return Err(RegistryError::InvalidName(format!("{id} is not a URL-safe id")).into());
        }
        registry::check_display_name(&doc.domain.name)?;
        {
            let _guard = self.create_lock.lock();
            self.ensure_unique_name(&doc.domain.name)?;
            let domain = SystemDomain {
                id: id.clone(),
                name: doc.domain.name.clone(),
                storage_namespace: storage_namespace(&id),
                created_at: doc.domain.created_at,
            };
            self.install_domain(DomainConfig::new(domain))?;
            self.bump_counter(&id);
        }
        for schema in doc.entity_types.values() {
            let created = self.define_entity_schema(
                id.as_str(),
                NewEntityType {
                    entity_kind: schema.entity_kind,
                    name: schema.name.clone(),
                    attributes: schema.attributes.clone(),
                },
            )?;
            if created.entity_type_id != schema.entity_type_id {
                return Err(RegistryError::InvalidName(format!(
                    "entity type {} does not match the slug of its name {:?}",
                    schema.entity_type_id, schema.name
                ))
                .into());
            }
        }
        for ty in doc.interaction_types.values() {
            self.define_interaction_type(
                id.as_str(),
                NewInteractionType {
                    name: ty.name.clone(),
                    explicitness: ty.explicitness,
                    default_weight: ty.default_weight,
                    actor_mode: ty.actor_mode,
                    track_timestamp: ty.track_timestamp,
                    target: ty.target,
                    target_entity_type: ty.target_entity_type.clone(),
                },
            )?;
        }
        // hybrids reference other scenarios, so they go last
        let (hybrids, bases): (Vec<&ScenarioConfig>, Vec<&ScenarioConfig>) =
            doc.scenarios.values().partition(|s| s.algorithm.is_hybrid());
        for s in bases.into_iter().chain(hybrids) {
            self.create_scenario(
                id.as_str(),
                NewScenario {
                    id: Some(s.scenario_id.to_string()),
                    name: s.name.clone(),
                    target_entity_type: s.target_entity_type.clone(),
                    audience: s.audience,
                    context: s.context,
                    algorithm: s.algorithm.clone(),
                    post_filters: s.post_filters.clone(),
                    echo_attributes: s.echo_attributes.clone(),
                },
            )?;
        }
        Ok(true)
    }

    // ---- data plane ----

    fn append(&self, writer: &mut Writer, record: &LogRecord) -> Result<(), CatalogError> {
        if let Some(log) = writer.log.as_mut() {
            self.touch(log.path());
            log.append(record)?;
        }
        Ok(())
    }

    /// Inserts or wholly replaces an entity record.
    pub fn upsert_entity(
        &self,
        domain: &str,
        entity_type: &str,
        entity_id: &str,
        values: BTreeMap<String, AttributeValue>,
    ) -> Result<Ack, Error> {
        let domain = self.domain(domain)?;
        let mut writer = domain.writer.lock();
        let current = domain.state.load_full();
        let schema = current
            .config
            .schema(entity_type)
            .ok_or_else(|| CatalogError::UnknownEntityType(entity_type.to_string()))?;
        check_id(entity_id).map_err(CatalogError::InvalidEntityId)?;
        let size = encoded_size(&values);
        if size > MAX_RECORD_BYTES {
            return Err(CatalogError::PayloadTooLarge(size).into());
        }
        let values = validate_values(schema, values)?;
        let record = EntityRecord {
            entity_type_id: schema.entity_type_id.clone(),
            entity_id: entity_id.to_string(),
            values,
            sequence: current.sequence + 1,
        };
        let logged = LogRecord::Entity(record);
        self.append(&mut writer, &logged)?;
        let LogRecord::Entity(record) = logged else { unreachable!() };
        let mut next = (*current).clone();
        next.apply_entity(record);
        let ack = Ack { entity_id: Some(entity_id.to_string()), sequence: next.sequence };
        domain.state.store(Arc::new(next));
        Ok(ack)
    }

    pub fn record_interaction(&self, domain: &str, new: NewInteraction) -> Result<Ack, Error> {
        let domain = self.domain(domain)?;
        let mut writer = domain.writer.lock();
        let current = domain.state.load_full();
        let mut event = validate_interaction(
            &current.config,
            new,
            |ty, id| current.entity(ty, id).is_some(),
            Utc::now(),
        )?;
        event.sequence = current.sequence + 1;
        let logged = LogRecord::Event(event);
        self.append(&mut writer, &logged)?;
        let LogRecord::Event(event) = logged else { unreachable!() };
        let mut next = (*current).clone();
        next.apply_event(event);
        let ack = Ack { entity_id: None, sequence: next.sequence };
        domain.state.store(Arc::new(next));
        Ok(ack)
    }

    pub fn entity(&self, domain: &str, entity_type: &str, id: &str) -> Result<Arc<EntityRecord>, Error> {
        let snapshot = self.snapshot(domain)?;
        let ty = EntityTypeId::new(entity_type);
        if snapshot.config.schema(entity_type).is_none() {
            return Err(CatalogError::UnknownEntityType(entity_type.to_string()).into());
        }
        snapshot
            .entity(&ty, id)
            .cloned()
            .ok_or_else(|| CatalogError::UnknownTarget { entity_type: entity_type.to_string(), id: id.to_string() }.into())
    }

    /// The current immutable state of a domain.
    pub fn snapshot(&self, domain: &str) -> Result<Snapshot, Error> {
        Ok(self.domain(domain)?.state.load_full())
    }

    // ---- recovery ----

    fn replay_dir(&self, dir: &Path) -> Result<(DomainState, RecoveryReport, u64), Error> {
        let config_path = dir.join(CONFIG_FILE);
        self.touch(&config_path);
        let doc = fs::read_to_string(&config_path).map_err(storage)?;
        let config = DomainConfig::from_document(&doc).map_err(|e| Error::Storage(format!("{}: {e}", config_path.display())))?;
        let log_path = dir.join(LOG_FILE);
        self.touch(&log_path);
        let contents = read_log(&log_path).map_err(storage)?;
        let mut state = DomainState::new(Arc::new(config));
        let records = contents.records.len() as u64;
        for record in contents.records {
            match record {
                LogRecord::Entity(r) => state.apply_entity(r),
                LogRecord::Event(e) => state.apply_event(e),
            }
        }
        if let Some(c) = &contents.corruption {
            tracing::warn!(domain = %state.config.domain.id, offset = c.offset, reason = %c.reason, "log truncated during replay");
        }
        let report = RecoveryReport {
            domain: state.config.domain.id.clone(),
            records,
            corruption: contents.corruption,
        };
        Ok((state, report, contents.valid_len))
    }

    /// Rebuilds a domain's state from its storage namespace alone, without
    /// touching the live state.
    pub fn replay(&self, domain: &str) -> Result<(DomainState, RecoveryReport), Error> {
        let d = self.domain(domain)?;
        let writer = d.writer.lock();
        let dir = writer
            .dir
            .clone()
            .ok_or_else(|| Error::Storage("domain has no storage namespace on disk".into()))?;
        drop(writer);
        let (state, report, _) = self.replay_dir(&dir)?;
        Ok((state, report))
    }

    /// Whether the configuration of `domain` contains any content-based scenario.
    pub fn has_content_scenarios(&self, domain: &str) -> Result<bool, Error> {
        Ok(self
            .domain_config(domain)?
            .scenarios
            .values()
            .any(|s| matches!(s.algorithm, AlgorithmSpec::ContentBased { .. })))
    }
}

fn storage(e: impl std::fmt::Display) -> Error {
    Error::Storage(e.to_string())
}
