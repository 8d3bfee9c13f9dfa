//! CSV form of value maps.
//!
//! Both layouts start with a metadata comment,
//! `# context_id=<id> psi=<feature> kind=<env kind>`. Position maps follow
//! with one row per lattice row (unreachable cells as 0); other features
//! follow with a `key,value` table. Values are written in shortest
//! round-trip form.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::{full_domain, AnalysisError, ValueMap};
use crate::env::{EnvKind, FeatureKey, FeatureKind, Pos};

pub fn export_value_map(vm: &ValueMap) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    match vm.psi {
        FeatureKind::Position => {
            let (width, height) = vm.kind.lattice();
            for y in 0..height as i32 {
                let row: Vec<String> = (0..width as i32)
                    .map(|x| vm.value(&FeatureKey::Pos(Pos::new(x, y))).to_string())
                    .collect();
                w.write_record(&row).expect("writing to memory");
            }
        }
        FeatureKind::Message | FeatureKind::FullState => {
            w.write_record(["key", "value"]).expect("writing to memory");
            let keys: Vec<FeatureKey> = match full_domain(&vm.kind, vm.psi) {
                Some(domain) => domain,
                None => vm.entries.keys().copied().collect(),
            };
            for z in keys {
                w.write_record([z.to_string(), vm.value(&z).to_string()])
                    .expect("writing to memory");
            }
        }
    }
    let body = String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8");
    format!(
        "# context_id={} psi={} kind={}\n{body}",
        vm.context_id, vm.psi, vm.kind
    )
}

pub fn parse_value_map(text: &str) -> Result<ValueMap, AnalysisError> {
    let bad = |m: String| AnalysisError::Parse(m);
    let (header, body) = text.split_once('\n').unwrap_or((text, ""));
    let meta = header
        .strip_prefix('#')
        .ok_or_else(|| bad("missing `#` metadata line".into()))?;
    let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
    for item in meta.split_whitespace() {
        let (k, v) = item.split_once('=').ok_or_else(|| bad(format!("bad metadata `{item}`")))?;
        fields.insert(k, v);
    }
    let field = |k: &str| fields.get(k).copied().ok_or_else(|| bad(format!("metadata lacks `{k}`")));
    let context_id: u64 = field("context_id")?
        .parse()
        .map_err(|_| bad("context_id is not an integer".into()))?;
    let psi: FeatureKind = field("psi")?.parse()?;
    let kind: EnvKind = field("kind")?.parse()?;

    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(format!("`{s}` is not a number")));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(psi != FeatureKind::Position)
        .flexible(psi == FeatureKind::Position)
        .from_reader(body.as_bytes());
    let mut entries = BTreeMap::new();
    match psi {
        FeatureKind::Position => {
            let (width, height) = kind.lattice();
            let mut rows = 0;
            for (y, rec) in reader.records().enumerate() {
                let rec = rec.map_err(|e| bad(e.to_string()))?;
                if rec.len() != width as usize {
                    return Err(bad(format!("row {y} has {} cells, expected {width}", rec.len())));
                }
                for (x, cell) in rec.iter().enumerate() {
                    entries.insert(FeatureKey::Pos(Pos::new(x as i32, y as i32)), number(cell)?);
                }
                rows += 1;
            }
            if rows != height {
                return Err(bad(format!("{rows} rows, expected {height}")));
            }
        }
        FeatureKind::Message | FeatureKind::FullState => {
            for rec in reader.records() {
                let rec = rec.map_err(|e| bad(e.to_string()))?;
                let key: FeatureKey = rec[0].parse()?;
                entries.insert(key, number(&rec[1])?);
            }
        }
    }
    Ok(ValueMap {
        context_id,
        kind,
        psi,
        entries,
    })
}

pub fn write_value_map(vm: &ValueMap, path: &Path) -> Result<(), AnalysisError> {
    fs::write(path, export_value_map(vm)).map_err(|source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_value_map(path: &Path) -> Result<ValueMap, AnalysisError> {
    let text = fs::read_to_string(path).map_err(|source| AnalysisError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_value_map(&text)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::analysis::{optimal_values, project_value};
    use crate::env::{generate_context, EventId};

    #[test]
    fn grid_layout() {
        let kind = EnvKind::corridors(2, 1).unwrap();
        let vm = ValueMap {
            context_id: 9,
            kind,
            psi: FeatureKind::Position,
            entries: [(FeatureKey::Pos(Pos::new(0, 1)), 1.0), (FeatureKey::Pos(Pos::new(0, 0)), 0.9)]
                .into_iter()
                .collect(),
        };
        let text = export_value_map(&vm);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# context_id=9 psi=position kind=corridors:m=2,t=1,max_steps=1");
        assert_eq!(&lines[1..], ["0.9,0", "1,0"]);
        assert!(parse_value_map(&text).unwrap().approx_eq(&vm, 0.0));
    }

    #[test]
    fn real_maps_round_trip() {
        let kind = EnvKind::multi_room(3, true, 11, 11).unwrap();
        let ctx = generate_context(&kind, 2).unwrap();
        let v = optimal_values(&ctx, 0.9);
        for psi in [FeatureKind::Position, FeatureKind::Message, FeatureKind::FullState] {
            let vm = project_value(&v, psi, &ctx);
            let back = parse_value_map(&export_value_map(&vm)).unwrap();
            assert!(back.approx_eq(&vm, 1e-12), "{psi}");
        }
        let msg = export_value_map(&project_value(&v, FeatureKind::Message, &ctx));
        assert!(msg.contains("\nlava_death,0\n"));
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(parse_value_map("0,1\n").is_err());
        assert!(parse_value_map("# context_id=1 psi=position kind=corridors:m=2,t=1\n0,0\n").is_err());
        assert!(parse_value_map("# context_id=1 psi=message kind=keyroom\nkey,value\nnope,1\n").is_err());
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("absent.csv");
        let err = read_value_map(&missing).unwrap_err().to_string();
        assert!(err.contains("absent.csv"));
    }

    proptest! {
        #[test]
        fn random_maps_round_trip(
            id in any::<u64>(),
            cells in proptest::collection::btree_map((0i32..9, 0i32..9), 0.0f64..=1.0, 0..40),
            events in proptest::collection::vec(0.0f64..=1.0, 5),
        ) {
            let kind = EnvKind::key_room(7).unwrap();
            let pos = ValueMap {
                context_id: id,
                kind,
                psi: FeatureKind::Position,
                entries: cells.iter().map(|(&(x, y), &v)| (FeatureKey::Pos(Pos::new(x, y)), v)).collect(),
            };
            prop_assert!(parse_value_map(&export_value_map(&pos)).unwrap().approx_eq(&pos, 1e-12));
            let msg = ValueMap {
                context_id: id,
                kind,
                psi: FeatureKind::Message,
                entries: EventId::ALL.iter().zip(&events).map(|(&e, &v)| (FeatureKey::Msg(e), v)).collect(),
            };
            let back = parse_value_map(&export_value_map(&msg)).unwrap();
            // Events outside the kind's vocabulary are not part of its domain.
            let vocab = full_domain(&kind, FeatureKind::Message).unwrap();
            for z in vocab {
                prop_assert_eq!(back.value(&z), msg.value(&z));
            }
        }
    }
}
