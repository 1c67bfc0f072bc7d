import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenghz.config import (
    ConfigError,
    ExperimentConfig,
    AnalysisSpec,
    SamplingSpec,
    key_line,
    parse_config,
    serialize_config,
)
from greenghz.optics import SourceSpec, TransducerSpec


def test_minimal_ghz_defaults():
    cfg = parse_config('experiment = "ghz3"\nsampling.seed = 7\n')
    assert cfg.source == SourceSpec()
    assert cfg.transducer == TransducerSpec(1.0, 0.0)
    assert cfg.pbs_visibility == 1.0
    assert cfg.sampling == SamplingSpec(1e4, 7)
    assert cfg.analysis == AnalysisSpec(tomography=False, ghz_suite=True, bootstrap_resamples=200)
    assert cfg.n_qubits == 3


def test_bell_defaults_to_tomography():
    cfg = parse_config('experiment = "bell_after_conversion"\n')
    assert cfg.analysis.tomography and not cfg.analysis.ghz_suite
    assert cfg.sampling.seed is None


def test_table_headers():
    text = 'experiment = "ghz3"\n[source]\nvisibility = 0.9\n[transducer]\nbackground_rate = 0.2\n'
    cfg = parse_config(text)
    assert cfg.source.visibility == 0.9
    assert cfg.transducer.background_rate == 0.2


def test_visibility_range_names_key_and_line():
    with pytest.raises(ConfigError) as exc:
        parse_config('experiment = "ghz3"\nsource.visibility = 1.5\n')
    assert exc.value.key == "source.visibility"
    assert exc.value.line == 2
    assert str(exc.value).startswith("source.visibility (line 2)")


def test_line_inside_table():
    with pytest.raises(ConfigError) as exc:
        parse_config('experiment = "ghz3"\n\n[transducer]\nefficiency_eta = 0\n')
    assert exc.value.key == "transducer.efficiency_eta"
    assert exc.value.line == 4


def test_unknown_key():
    with pytest.raises(ConfigError, match="unknown key") as exc:
        parse_config('experiment = "ghz3"\nsource.colour = "green"\n')
    assert exc.value.key == "source.colour" and exc.value.line == 2


@pytest.mark.parametrize(
    "line,key",
    [
        ('experiment = "ghz4"', "experiment"),
        ("pbs_visibility = -0.1", "pbs_visibility"),
        ("transducer.background_rate = -1", "transducer.background_rate"),
        ("sampling.events_per_setting = 0", "sampling.events_per_setting"),
        ("sampling.seed = 1.5", "sampling.seed"),
        ("sampling.seed = -3", "sampling.seed"),
        ("analysis.bootstrap_resamples = 50", "analysis.bootstrap_resamples"),
        ('analysis.tomography = "yes"', "analysis.tomography"),
        ("source.phase_phi = nan", "source.phase_phi"),
        ('source.kind = "laser"', "source.kind"),
    ],
)
def test_invalid_values(line, key):
    text = line + "\n" if line.startswith("experiment") else f'experiment = "ghz3"\n{line}\n'
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.key == key
    assert exc.value.line is not None


def test_missing_experiment():
    with pytest.raises(ConfigError, match="experiment"):
        parse_config("sampling.seed = 1\n")


def test_malformed():
    with pytest.raises(ConfigError, match="malformed") as exc:
        parse_config('experiment = "ghz3"\nsource.visibility = \n')
    assert exc.value.line == 2


def test_ghz_suite_only_for_ghz3():
    with pytest.raises(ConfigError, match="ghz3"):
        parse_config('experiment = "bell_after_conversion"\nanalysis.ghz_suite = true\n')


def test_bootstrap_zero_allowed():
    assert parse_config('experiment = "ghz3"\nanalysis.bootstrap_resamples = 0\n').analysis.bootstrap_resamples == 0


def test_key_line_quoted_and_spaced():
    text = 'experiment = "ghz3"\n  source . "visibility" = 0.5\n'
    assert key_line(text, "source.visibility") == 2


configs = st.builds(
    lambda exp, phi, v, eta, bg, pv, ev, seed, tomo, nboot: ExperimentConfig(
        exp,
        SourceSpec("sandwich_bell", phi, v),
        TransducerSpec(eta, bg),
        pv,
        SamplingSpec(ev, seed),
        AnalysisSpec(tomo, exp == "ghz3", nboot),
    ),
    st.sampled_from(["bell_before_conversion", "bell_after_conversion", "ghz3"]),
    st.floats(-10, 10, allow_nan=False),
    st.floats(0, 1),
    st.floats(1e-6, 1),
    st.floats(0, 1e3),
    st.floats(0, 1),
    st.floats(1e-3, 1e9),
    st.none() | st.integers(0, 2**63 - 1),
    st.booleans(),
    st.just(0) | st.integers(100, 10_000),
)


@settings(max_examples=200, deadline=None)
@given(configs)
def test_round_trip(cfg):
    text = serialize_config(cfg)
    back = parse_config(text)
    assert back == cfg
    assert parse_config(serialize_config(back)) == back


def test_flat_echo_round_trips():
    cfg = parse_config('experiment = "ghz3"\nsource.phase_phi = 0.1\nsampling.seed = 3\n')
    assert parse_config(serialize_config(cfg)).flat() == cfg.flat()
    assert math.isclose(cfg.flat()["source.phase_phi"], 0.1)
