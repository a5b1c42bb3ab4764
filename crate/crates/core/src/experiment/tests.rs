use super::*;
use crate::Error;

fn temp_cache(tag: &str) -> FrameCache {
    let dir = std::env::temp_dir().join(format!("bergman-unit-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    FrameCache::new(dir)
}

fn small_expansion() -> ExperimentConfig {
    ExperimentConfig { samples: Some(4), ks: vec![4, 6, 8, 10, 12], ..ExperimentConfig::default_for(ExperimentId::Expansion) }
}

#[test]
fn catalog_has_nine_entries_with_valid_defaults() {
    let cat = list_experiments();
    assert_eq!(cat.len(), 9);
    for e in &cat {
        ExperimentConfig::default_for(e.id).validate().unwrap();
        assert_eq!(e.id.name().parse::<ExperimentId>().unwrap(), e.id);
    }
    assert!(matches!("spectral".parse::<ExperimentId>(), Err(Error::Config(_))));
}

#[test]
fn config_round_trips_through_toml() {
    let c = ExperimentConfig::default_for(ExperimentId::SingularBig);
    let text = c.to_toml().unwrap();
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    let minimal = "experiment = \"decay\"\nks = [8, 16, 24]\n[model]\nname = \"sphere\"\n";
    let m = ExperimentConfig::from_toml(minimal).unwrap();
    assert_eq!(m.tolerances, Tolerances::default());
    assert_eq!(m.model, crate::geometry::ModelSpec::sphere());
}

#[test]
fn invalid_configs_are_rejected() {
    let base = ExperimentConfig::default_for(ExperimentId::Expansion);
    for ks in [vec![], vec![8, 8], vec![16, 8], vec![0, 4]] {
        assert!(ExperimentConfig { ks, ..base.clone() }.validate().is_err());
    }
    let mut t = base.clone();
    t.tolerances.leading = 0.0;
    assert!(t.validate().is_err());
    let s = ExperimentConfig { singular: None, ..ExperimentConfig::default_for(ExperimentId::SingularSkoda) };
    assert!(s.validate().is_err());
    assert!(ExperimentConfig::from_toml("experiment = \"nope\"\nks = [1]\n[model]\nname = \"sphere\"\n").is_err());
}

#[test]
fn overrides_set_nested_keys() {
    let mut c = ExperimentConfig::default_for(ExperimentId::SingularSkoda);
    c.apply_override("singular.tau=0.25").unwrap();
    c.apply_override("ks=[2, 4, 6]").unwrap();
    c.apply_override("tolerances.skoda = 1e-8").unwrap();
    c.apply_override("model.name=torus").unwrap();
    c.apply_override("output=out/run1").unwrap();
    assert_eq!(c.singular.as_ref().unwrap().tau, 0.25);
    assert_eq!(c.ks, vec![2, 4, 6]);
    assert_eq!(c.tolerances.skoda, 1e-8);
    assert_eq!(c.model.name, crate::geometry::ModelName::Torus);
    assert_eq!(c.output.as_deref(), Some(std::path::Path::new("out/run1")));
    let before = c.clone();
    assert!(c.apply_override("ks=[3, 2]").is_err());
    assert!(c.apply_override("no-equals-sign").is_err());
    assert!(c.apply_override("bogus=1").is_err());
    assert_eq!(c, before);
}

#[test]
fn csv_uses_seventeen_significant_digits() {
    let mut curve = Curve::new("c", &["k", "v"]);
    curve.push(vec![8.0, 0.1]);
    curve.push(vec![16.0, 1.0 / 3.0]);
    let csv = curve.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,v");
    assert_eq!(lines[1], "8.0000000000000000e0,1.0000000000000001e-1");
    for line in &lines[1..] {
        for field in line.split(',') {
            let mantissa = field.split('e').next().unwrap().replace(['.', '-'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }
    assert_eq!(format17(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
    assert!(curve.to_plot_data().starts_with("# k v\n8.0000000000000000e0 1.0000000000000001e-1\n"));
}

#[test]
fn cached_frames_reproduce_fresh_reports() {
    let cache = temp_cache("transparency");
    let c = small_expansion();
    let cold = run(&c, &cache).unwrap();
    let warm = run(&c, &cache).unwrap();
    assert!(cold.warnings.is_empty() && warm.warnings.is_empty());
    assert_eq!(cold.without_timing(), warm.without_timing());
    assert!(cold.passed() || cold.assertions.iter().all(|a| a.name == "leading-coefficient"));
    cache.clean().unwrap();
}

#[test]
fn corrupted_cache_entry_is_purged_and_rebuilt() {
    let cache = temp_cache("corrupt");
    let c = small_expansion();
    let first = run(&c, &cache).unwrap();
    let victim = cache.dir().join(FrameCache::key(&c.model, 6));
    let text = std::fs::read_to_string(&victim).unwrap();
    std::fs::write(&victim, text.replacen("e-", "e-1", 1)).unwrap();
    let repaired = run(&c, &cache).unwrap();
    assert_eq!(repaired.warnings.len(), 1, "{:?}", repaired.warnings);
    assert_eq!(first.without_timing(), repaired.without_timing());
    let again = run(&c, &cache).unwrap();
    assert!(again.warnings.is_empty());
    assert!(cache.clean().unwrap() >= 6);
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let cache = temp_cache("workers");
    let c = ExperimentConfig { samples: Some(40), ..ExperimentConfig::default_for(ExperimentId::Injectivity) };
    let c = ExperimentConfig { ks: vec![2, 3], ..c };
    let one = run(&ExperimentConfig { workers: Some(1), ..c.clone() }, &cache).unwrap();
    let many = run(&ExperimentConfig { workers: Some(3), ..c.clone() }, &cache).unwrap();
    let csv = |r: &ExperimentReport| r.curves.iter().map(|c| c.to_csv()).collect::<Vec<_>>();
    assert_eq!(csv(&one), csv(&many));
    assert_eq!(one.constants, many.constants);
    cache.clean().unwrap();
}

#[test]
fn outputs_are_written_per_curve() {
    let cache = temp_cache("outputs");
    let report = run(&ExperimentConfig { ks: vec![2, 4, 6], ..ExperimentConfig::default_for(ExperimentId::SingularSkoda) }, &cache).unwrap();
    assert!(report.passed(), "{:?}", report.assertions);
    let dir = cache.dir().join("out");
    let files = write_outputs(&report, &dir).unwrap();
    assert_eq!(files.len(), 3);
    let csv = std::fs::read_to_string(dir.join("admissibility.csv")).unwrap();
    assert!(csv.starts_with("k,threshold,m_k,accepted,max_relative_discrepancy\n"));
    let back: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(back.without_timing(), report.without_timing());
    std::fs::remove_dir_all(cache.dir()).unwrap();
}

#[test]
fn suite_lists_eleven_criteria() {
    assert_eq!(CRITERIA.len(), 11);
    assert!(criterion(12, Profile::Quick, &temp_cache("none")).is_err());
    assert_eq!("full".parse::<Profile>().unwrap(), Profile::Full);
    assert!("slow".parse::<Profile>().is_err());
}
