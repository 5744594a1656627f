use contactlab::config::{CommandKind, CommandParams, ConfigError, ExperimentConfig, GridSpec, InitialField};
use contactlab_core::meanfield::Trap;
use proptest::prelude::*;

#[test]
fn a_bare_command_gets_every_default() {
    for kind in CommandKind::ALL {
        let cfg = ExperimentConfig::from_toml_str(&format!("command = \"{}\"", kind.name())).unwrap();
        assert_eq!(cfg.command(), kind);
        assert_eq!(cfg.params, CommandParams::defaults(kind));
        assert_eq!(cfg.seed, 0);
        assert_eq!(CommandKind::parse(kind.name()), Some(kind));
    }
}

#[test]
fn system_keys_overlay_one_at_a_time() {
    let cfg = ExperimentConfig::from_toml_str(
        "command = \"gp-evolve\"\n[params]\nsystem = { steps = 7, trap = { kind = \"harmonic\", omega = 2.0 } }\n",
    )
    .unwrap();
    let CommandParams::GpEvolve(p) = &cfg.params else { panic!() };
    assert_eq!(p.system.steps, 7);
    assert_eq!(p.system.trap, Trap::Harmonic { omega: 2.0 });
    // gp-evolve's own defaults survive
    let CommandParams::GpEvolve(d) = CommandParams::defaults(CommandKind::GpEvolve) else { panic!() };
    assert_eq!(p.system.dt, d.system.dt);
    assert_eq!(p.system.g, d.system.g);
}

#[test]
fn unknown_and_malformed_keys_are_errors() {
    let cases = [
        "command = \"twobody\"\nextra = 1\n",
        "command = \"twobody\"\n[params]\nnope = 1\n",
        "command = \"gp-groundstate\"\n[params]\nsystem = { gee = 1.0 }\n",
        "command = \"sweep\"\n[params]\ngrid = { kind = \"origin_aligned\", n = 10, r_max = 1.0, r_min = 0.1 }\n",
        "command = \"critical\"\n[params]\nlevels = \"four\"\n",
        "command = \"teleport\"\n",
        "seed = 1\n",
    ];
    for text in cases {
        let err = ExperimentConfig::from_toml_str(text).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_) | ConfigError::Invalid { .. }), "{text}: {err}");
    }
}

#[test]
fn grid_specs_build() {
    let g = GridSpec::Logarithmic { n: 50, r_min: 1e-3, r_max: 1.0 }.build().unwrap();
    assert_eq!(g.len(), 50);
    assert!(GridSpec::Uniform { n: 10, r_min: 1.0, r_max: 0.5 }.build().is_err());
    let g = GridSpec::OriginAligned { n: 100, r_max: 2.0 }.build().unwrap();
    assert!((g.r_min() - 0.02).abs() < 1e-15);
}

fn roundtrip(cfg: &ExperimentConfig) {
    let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
    assert_eq!(&back, cfg);
    let back = ExperimentConfig::from_json_str(&cfg.to_json_string()).unwrap();
    assert_eq!(&back, cfg);
}

#[test]
fn every_default_roundtrips() {
    for kind in CommandKind::ALL {
        roundtrip(&ExperimentConfig::from_toml_str(&format!("command = \"{}\"", kind.name())).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn edited_configs_roundtrip(
        seed in 0..=i64::MAX as u64,
        m_exp in 2u32..7,
        side in 1.0f64..50.0,
        g in 0.0f64..10.0,
        width in 0.1f64..3.0,
        noise in 0.0f64..0.5,
    ) {
        let text = format!(
            "command = \"gp-groundstate\"\nseed = {seed}\noutput_dir = \"somewhere\"\n[params]\nm = {}\nside = {side:?}\nsystem = {{ g = {g:?} }}\n\
             init = {{ kind = \"gaussian\", width = {width:?}, center = [0.0, 1.0, 0.0], velocity = [0.0, 0.0, 0.5], noise = {noise:?} }}\n",
            1u32 << m_exp
        );
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        let CommandParams::GpGroundstate(p) = &cfg.params else { panic!() };
        prop_assert_eq!(p.system.g, g);
        prop_assert_eq!(&p.init, &InitialField::Gaussian { width, center: [0.0, 1.0, 0.0], velocity: [0.0, 0.0, 0.5], noise });
        roundtrip(&cfg);
    }
}
