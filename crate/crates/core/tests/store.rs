use std::io;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};
use proptest::prelude::*;
use serde_json::{json, Value};

use platform_rater_core::store::FaultPoint;
use platform_rater_core::{
    AssessmentProject, Catalog, ConsistencyConfig, DocumentKind, RankingInput, Store, StoreError,
};

const WORKED_EXAMPLE: &str = include_str!("../../../fixtures/worked-example.json");

fn t(secs: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(1_700_000_000 + secs, 0).unwrap()
}

fn project_payload(id: &str, name: &str) -> Value {
    let cat = Catalog::bundled();
    let p = AssessmentProject::create(&cat, id, name, "ROSE", "", ["security"], t(0)).unwrap();
    serde_json::to_value(p).unwrap()
}

/// Store whose clock advances one second per call.
fn ticking_store(dir: &std::path::Path) -> Store {
    let tick = Arc::new(AtomicI64::new(0));
    Store::open(dir)
        .unwrap()
        .with_clock(move || t(tick.fetch_add(1, Ordering::SeqCst)))
}

#[test]
fn versions_and_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let store = ticking_store(dir.path());
    let kind = DocumentKind::SingleAssessment;

    let v1 = store.save(kind, "p1", project_payload("p1", "a"), None).unwrap();
    assert_eq!(v1.version, 1);
    let v2 = store.save(kind, "p1", project_payload("p1", "b"), Some(1)).unwrap();
    assert_eq!(v2.version, 2);

    let err = store
        .save(kind, "p1", project_payload("p1", "c"), Some(1))
        .unwrap_err();
    assert!(matches!(err, StoreError::Conflict { expected: 1, current: 2, .. }));
    assert_eq!(store.load(kind, "p1").unwrap(), v2);

    assert!(matches!(
        store.save(kind, "p2", project_payload("p2", "x"), Some(3)),
        Err(StoreError::Conflict { current: 0, .. })
    ));
    assert!(matches!(
        store.load(kind, "p2"),
        Err(StoreError::NotFound { .. })
    ));
    assert!(matches!(
        store.load(DocumentKind::RankingResult, "p1"),
        Err(StoreError::NotFound { .. })
    ));
}

#[test]
fn load_returns_saved_payload_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let store = ticking_store(dir.path());
    let input: RankingInput = serde_json::from_str(WORKED_EXAMPLE).unwrap();
    let result = input.evaluate(&ConsistencyConfig::default()).unwrap();
    let payload = serde_json::to_value(&result).unwrap();
    store
        .save(DocumentKind::RankingResult, "r1", payload.clone(), None)
        .unwrap();
    let loaded = store.load(DocumentKind::RankingResult, "r1").unwrap();
    assert_eq!(
        serde_json::to_string(&loaded.payload).unwrap(),
        serde_json::to_string(&result).unwrap()
    );
    let back: platform_rater_core::RankingResult = serde_json::from_value(loaded.payload).unwrap();
    assert_eq!(back, result);
}

#[test]
fn list_order_filter_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let fixed = Store::open(dir.path()).unwrap().with_clock(|| t(5));
    assert!(fixed.list(None).unwrap().is_empty());

    fixed
        .save(DocumentKind::SingleAssessment, "b", project_payload("b", "B"), None)
        .unwrap();
    fixed
        .save(DocumentKind::SingleAssessment, "a", project_payload("a", "A"), None)
        .unwrap();
    let input: Value = serde_json::from_str(WORKED_EXAMPLE).unwrap();
    fixed
        .save(DocumentKind::MultiAssessment, "m", input, None)
        .unwrap();

    let all = fixed.list(None).unwrap();
    let ids: Vec<&str> = all.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, ["a", "b", "m"]);
    assert_eq!(all[0].name.as_deref(), Some("A"));
    assert_eq!(all[2].name.as_deref(), Some("Cloud IoT platforms"));

    let singles = fixed.list(Some(DocumentKind::SingleAssessment)).unwrap();
    assert_eq!(singles.len(), 2);

    let later = Store::open(dir.path()).unwrap().with_clock(|| t(9));
    later
        .save(DocumentKind::SingleAssessment, "b", project_payload("b", "B2"), Some(1))
        .unwrap();
    let ids: Vec<String> = later.list(None).unwrap().into_iter().map(|s| s.id).collect();
    assert_eq!(ids, ["b", "a", "m"]);

    let index: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("index.json")).unwrap()).unwrap();
    assert_eq!(index.as_array().unwrap().len(), 3);
    assert_eq!(index[0]["id"], "b");
    assert_eq!(index[0]["version"], 2);
    assert!(dir.path().join("single-assessment/a.json").is_file());
}

#[test]
fn invalid_payloads_and_ids_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let store = ticking_store(dir.path());
    assert!(matches!(
        store.save(DocumentKind::SingleAssessment, "p", json!({"name": "x"}), None),
        Err(StoreError::Validation(_))
    ));
    assert!(matches!(
        store.save(DocumentKind::SingleAssessment, "../x", project_payload("x", "x"), None),
        Err(StoreError::InvalidId(_))
    ));
    assert!(store.list(None).unwrap().is_empty());
}

fn failing_at(point: FaultPoint) -> impl Fn(FaultPoint) -> io::Result<()> + Send + Sync {
    move |p| {
        if p == point {
            Err(io::Error::other("injected"))
        } else {
            Ok(())
        }
    }
}

#[test]
fn interrupted_writes_keep_the_previous_version() {
    let kind = DocumentKind::SingleAssessment;
    for point in [FaultPoint::PartialWrite, FaultPoint::BeforeRename] {
        let dir = tempfile::tempdir().unwrap();
        let good = ticking_store(dir.path());
        let v1 = good.save(kind, "p", project_payload("p", "first"), None).unwrap();

        let faulty = ticking_store(dir.path()).with_fault_hook(failing_at(point));
        let err = faulty
            .save(kind, "p", project_payload("p", "second"), Some(1))
            .unwrap_err();
        assert!(matches!(err, StoreError::Io { .. }), "{point:?}: {err}");

        assert_eq!(good.load(kind, "p").unwrap(), v1, "{point:?}");
        let stray: Vec<_> = std::fs::read_dir(dir.path().join(kind.as_str()))
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(stray.len(), 1, "{point:?}: {stray:?}");

        let v2 = good.save(kind, "p", project_payload("p", "third"), Some(1)).unwrap();
        assert_eq!(v2.version, 2);
    }
}

#[test]
fn failure_after_rename_leaves_the_new_version_whole() {
    let dir = tempfile::tempdir().unwrap();
    let kind = DocumentKind::SingleAssessment;
    let good = ticking_store(dir.path());
    good.save(kind, "p", project_payload("p", "first"), None).unwrap();
    let faulty = ticking_store(dir.path()).with_fault_hook(failing_at(FaultPoint::BeforeIndex));
    assert!(faulty
        .save(kind, "p", project_payload("p", "second"), Some(1))
        .is_err());
    let doc = good.load(kind, "p").unwrap();
    assert_eq!(doc.version, 2);
    assert_eq!(doc.payload["name"], "second");
}

#[test]
fn leftover_temp_files_are_ignored() {
    let dir = tempfile::tempdir().unwrap();
    let store = ticking_store(dir.path());
    let kind = DocumentKind::SingleAssessment;
    store.save(kind, "p", project_payload("p", "ok"), None).unwrap();
    std::fs::write(dir.path().join("single-assessment/p.json.tmp"), b"{\"trunc").unwrap();
    std::fs::write(dir.path().join("single-assessment/q.json.tmp"), b"{").unwrap();
    assert_eq!(store.list(None).unwrap().len(), 1);
    assert_eq!(store.load(kind, "p").unwrap().payload["name"], "ok");
    assert!(matches!(store.load(kind, "q"), Err(StoreError::NotFound { .. })));
}

#[test]
fn concurrent_saves_to_one_id_serialize() {
    let dir = tempfile::tempdir().unwrap();
    let store = ticking_store(dir.path());
    let kind = DocumentKind::SingleAssessment;
    let threads: Vec<_> = (0..8)
        .map(|k| {
            let store = store.clone();
            std::thread::spawn(move || {
                for i in 0..5 {
                    store
                        .save(kind, "shared", project_payload("shared", &format!("{k}-{i}")), None)
                        .unwrap();
                    store
                        .save(kind, &format!("own-{k}"), project_payload("own", "x"), None)
                        .unwrap();
                }
            })
        })
        .collect();
    for th in threads {
        th.join().unwrap();
    }
    assert_eq!(store.load(kind, "shared").unwrap().version, 40);
    for k in 0..8 {
        assert_eq!(store.load(kind, &format!("own-{k}")).unwrap().version, 5);
    }
    assert_eq!(store.list(None).unwrap().len(), 9);
}

fn json_leaf() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::from),
        any::<i64>().prop_map(Value::from),
        any::<f64>()
            .prop_filter("finite", |f| f.is_finite())
            .prop_map(Value::from),
        "[ -~]{0,12}".prop_map(Value::from),
    ]
}

fn json_value() -> impl Strategy<Value = Value> {
    json_leaf().prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 0..4).prop_map(Value::from),
            proptest::collection::vec(("[a-z]{1,6}", inner), 0..4)
                .prop_map(|kv| Value::Object(kv.into_iter().collect())),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Arbitrary extra data inside a valid ranking input survives the round trip.
    #[test]
    fn round_trip_preserves_payload(extra in json_value(), versions in 1usize..4) {
        let dir = tempfile::tempdir().unwrap();
        let store = ticking_store(dir.path());
        let mut payload: Value = serde_json::from_str(WORKED_EXAMPLE).unwrap();
        payload["notes"] = extra;
        let mut last = 0;
        for _ in 0..versions {
            let doc = store.save(DocumentKind::MultiAssessment, "m", payload.clone(), None).unwrap();
            prop_assert!(doc.version > last);
            last = doc.version;
        }
        let loaded = store.load(DocumentKind::MultiAssessment, "m").unwrap();
        prop_assert_eq!(loaded.version, versions as u64);
        prop_assert_eq!(
            serde_json::to_string(&loaded.payload).unwrap(),
            serde_json::to_string(&payload).unwrap()
        );
    }
}
