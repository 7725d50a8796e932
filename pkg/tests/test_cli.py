import json
from fractions import Fraction
import pytest

from covercraft import cover, io
from covercraft.cli import main
from covercraft.config import (
    RunConfig,
    offsets_factorial_shift,
    offsets_stride_of_first_prime,
)
from covercraft.cover import FormTriple, Partition, PrimePair, TargetConfig
from covercraft.errors import ConfigError


def build_toy_system_file(path):
    partition = Partition(
        {(2, FormTriple(1, 1, 5)): (PrimePair(2, 5, 31),)},
        (Fraction(0), Fraction(100)),
    )
    cfg = TargetConfig(k_max=2, offsets=(5, 7), m_bound=2)
    system = cover.build_covering_system(partition, cfg)
    io.write_json(path, io.system_to_doc(system))
    return system


class TestConfig:
    def test_offset_presets(self):
        assert offsets_stride_of_first_prime(2) == (3, 6)
        assert offsets_stride_of_first_prime(4) == (5, 10, 15, 20)
        assert offsets_factorial_shift(2) == (3, 7)
        assert offsets_factorial_shift(3) == (7, 25, 121)

    def test_round_trip(self):
        cfg = RunConfig(k_max=3, offsets=[5, 7, 11], n_target=1000, band=["1/32", "1/24"])
        assert RunConfig.from_doc(cfg.to_doc()) == cfg

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_doc({"k_mx": 3})

    def test_validation_messages(self):
        with pytest.raises(ConfigError, match="K must be >= 2"):
            RunConfig(k_max=1).validate()
        with pytest.raises(ConfigError, match="band"):
            RunConfig(band=["a", "b"]).validate()
        with pytest.raises(ConfigError, match="distinct"):
            RunConfig(offsets=[5, 5]).validate()

    def test_threads_env(self, monkeypatch):
        monkeypatch.setenv("COVERCRAFT_THREADS", "4")
        assert RunConfig().resolved_threads() == 4
        assert RunConfig(threads=2).resolved_threads() == 2
        monkeypatch.delenv("COVERCRAFT_THREADS")
        assert RunConfig().resolved_threads() == 1


class TestPairsCommand:
    def test_small_sweep_writes_pairs_but_reports_shortfall(self, tmp_path, capsys):
        out = tmp_path / "pairs.json"
        rc = main(["--M", "2", "pairs", "--a", "2", "--p-max", "13", "--out", str(out)])
        assert rc == 2  # 6 pairs cannot feed 16 classes
        doc = io.read_json(out)
        got = {(e["a"], e["p"], int(e["q"])) for e in doc["pairs"]}
        assert {(2, 5, 31), (2, 7, 127), (2, 11, 23), (2, 11, 89), (2, 13, 8191)} <= got

    def test_hopeless_sweep_exits_2(self, tmp_path):
        rc = main(["pairs", "--a", "2", "--p-max", "2",
                   "--out", str(tmp_path / "pairs.json")])
        assert rc == 2

    def test_malformed_flags_exit_1(self, tmp_path):
        assert main(["pairs", "--p-max", "notanumber"]) == 1
        assert main(["--K", "1", "pairs", "--out", str(tmp_path / "p.json")]) == 1
        assert main(["pairs", "--a", "9", "--out", str(tmp_path / "p.json")]) == 1

    def test_full_sweep_exits_0(self, tmp_path):
        out = tmp_path / "pairs.json"
        rc = main(["--M", "2", "--L", "5,7", "pairs", "--p-max", "60", "--out", str(out)])
        assert rc == 0
        assert len(io.read_json(out)["pairs"]) >= 16


class TestCoverCommand:
    def make_pairs_file(self, tmp_path):
        out = tmp_path / "pairs.json"
        rc = main(["--M", "2", "pairs", "--a", "2", "--p-max", "60", "--out", str(out)])
        assert rc == 0
        return out

    def test_cover_builds_and_verifies(self, tmp_path, capsys):
        pairs = self.make_pairs_file(tmp_path)
        out = tmp_path / "system.json"
        rc = main(["--M", "2", "--L", "5,7", "cover", "--pairs", str(pairs),
                   "--out", str(out)])
        assert rc == 0
        printed = capsys.readouterr().out
        assert "W has" in printed and "sum 1/p" in printed
        doc = io.read_json(out)
        assert set(doc) >= {"version", "K", "M", "L_N", "entries", "W", "b"}
        assert doc["K"] == 2 and doc["L_N"] == [5, 7]
        assert all(set(e) == {"a", "j", "k", "l", "p", "q", "I"} for e in doc["entries"])

    def test_round_trip_identity(self, tmp_path):
        pairs = self.make_pairs_file(tmp_path)
        out = tmp_path / "system.json"
        assert main(["--M", "2", "--L", "5,7", "cover", "--pairs", str(pairs),
                     "--out", str(out)]) == 0
        doc = io.read_json(out)
        system = io.system_from_doc(doc)
        assert io.system_to_doc(system) == doc

    def test_duplicated_pair_is_a_distinctness_error(self, tmp_path):
        pairs_doc = io.mining_to_doc([], {"K": 2, "M": 2})
        pairs_doc["pairs"] = [{"a": 2, "p": 5, "q": "31"}] * 2
        path = tmp_path / "pairs.json"
        io.write_json(path, pairs_doc)
        rc = main(["--M", "2", "--L", "5,7", "cover", "--pairs", str(path),
                   "--out", str(tmp_path / "s.json")])
        assert rc == 1

    def test_insufficient_pairs_exit_2(self, tmp_path):
        out = tmp_path / "pairs.json"
        main(["--M", "2", "pairs", "--a", "2", "--p-max", "13", "--out", str(out)])
        rc = main(["--M", "2", "--L", "5,7", "cover", "--pairs", str(out),
                   "--out", str(tmp_path / "s.json")])
        assert rc == 2


class TestSearchCommand:
    def test_search_toy_system(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        out = tmp_path / "report.jsonl"
        rc = main(["search", "--system", str(sys_path), "--N", "100",
                   "--out", str(out), "--no-figures"])
        assert rc == 0
        records = io.read_report_lines(out)
        assert records[0]["record"] == "header"
        assert records[-1]["record"] == "trailer"
        trailer = records[-1]
        assert 0 <= trailer["Q"] <= trailer["Q_N"]

    def test_check_oracle_small_window(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        rc = main(["search", "--system", str(sys_path), "--N", "200", "--upper", "300",
                   "--out", str(tmp_path / "r.jsonl"), "--no-figures", "--check-oracle"])
        assert rc == 0

    def test_check_oracle_guard_exit_2(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        rc = main(["search", "--system", str(sys_path), "--N", str(3 * 10**6),
                   "--out", str(tmp_path / "r.jsonl"), "--no-figures", "--check-oracle"])
        assert rc == 2

    def test_byte_identical_reports_modulo_wall_time(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        outs = []
        for name in ("r1.jsonl", "r2.jsonl"):
            out = tmp_path / name
            assert main(["search", "--system", str(sys_path), "--N", "100",
                         "--out", str(out), "--no-figures"]) == 0
            lines = []
            for rec in io.read_report_lines(out):
                rec.pop("wall_time_s", None)
                lines.append(json.dumps(rec, sort_keys=True))
            outs.append(lines)
        assert outs[0] == outs[1]

    def test_report_figure_rendered_and_reproducible(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        blobs = []
        for name in ("ra.jsonl", "rb.jsonl"):
            out = tmp_path / name
            assert main(["search", "--system", str(sys_path), "--N", "100",
                         "--out", str(out)]) == 0
            png = out.with_suffix(".png")
            assert png.exists() and png.stat().st_size > 0
            blobs.append(png.read_bytes())
        assert blobs[0] == blobs[1]

    def test_missing_n_exit_1(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        assert main(["search", "--system", str(sys_path),
                     "--out", str(tmp_path / "r.jsonl"), "--no-figures"]) == 1


class TestOracleCommand:
    def test_writes_survivors(self, tmp_path):
        out = tmp_path / "oracle.json"
        rc = main(["--K", "2", "--L", "5,7", "oracle", "--N", "200", "--upper", "300",
                   "--out", str(out)])
        assert rc == 0
        doc = io.read_json(out)
        assert doc["kind"] == "oracle-survivors"
        assert doc["K"] == 2 and doc["L_N"] == [5, 7]
        assert all(s.isdigit() for s in doc["survivors"])


class TestAnalyzeCommand:
    def test_three_rows_all_flags_true(self, tmp_path, capsys):
        out = tmp_path / "diagnostics.json"
        rc = main(["analyze", "--grid", "2,10,100", "--pair-m", "2",
                   "--hit-cutoff", "200", "--out", str(out), "--no-figures"])
        assert rc == 0
        doc = io.read_json(out)
        assert len(doc["rows"]) == 3
        assert all(row["mertens_ok"] for row in doc["rows"])
        assert out.with_suffix(".csv").exists()
        text = out.with_suffix(".csv").read_text().splitlines()
        assert len(text) == 4 and text[0].startswith("x,")

    def test_figures_written_alongside(self, tmp_path):
        out = tmp_path / "diag.json"
        rc = main(["analyze", "--grid", "10,100", "--pair-m", "2,3",
                   "--hit-cutoff", "200", "--out", str(out)])
        assert rc == 0
        pngs = sorted(p.name for p in tmp_path.glob("diag_*.png"))
        assert "diag_mertens.png" in pngs and "diag_pair_sums.png" in pngs

    def test_bad_grid_exit_1(self, tmp_path):
        assert main(["analyze", "--grid", "1,10",
                     "--out", str(tmp_path / "d.json"), "--no-figures"]) == 1


class TestVerifyCommand:
    def test_fresh_system_passes(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        assert main(["verify", "--system", str(sys_path)]) == 0

    def test_perturbed_b_exits_3(self, tmp_path, capsys):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        doc = io.read_json(sys_path)
        doc["b"] = str(int(doc["b"]) + 1)
        io.write_json(sys_path, doc)
        rc = main(["verify", "--system", str(sys_path)])
        assert rc == 3
        assert "FAIL" in capsys.readouterr().out

    def test_swapped_q_exits_3(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        doc = io.read_json(sys_path)
        doc["entries"][0]["q"] = "29"
        io.write_json(sys_path, doc)
        assert main(["verify", "--system", str(sys_path)]) == 3

    def test_unknown_major_version_exit_1(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        doc = io.read_json(sys_path)
        doc["version"] = "2.0"
        io.write_json(sys_path, doc)
        assert main(["verify", "--system", str(sys_path)]) == 1

    def test_search_rejects_tampered_system_on_load(self, tmp_path):
        sys_path = tmp_path / "system.json"
        build_toy_system_file(sys_path)
        doc = io.read_json(sys_path)
        doc["W"] = str(int(doc["W"]) * 31)
        io.write_json(sys_path, doc)
        rc = main(["search", "--system", str(sys_path), "--N", "100",
                   "--out", str(tmp_path / "r.jsonl"), "--no-figures"])
        assert rc == 3


def test_config_file_drives_commands(tmp_path):
    cfg = RunConfig(k_max=2, m_bound=2, offsets=[5, 7], p_max=13)
    cfg_path = tmp_path / "run.json"
    io.write_json(cfg_path, cfg.to_doc())
    out = tmp_path / "pairs.json"
    rc = main(["--config", str(cfg_path), "pairs", "--a", "2", "--out", str(out)])
    assert rc == 2  # same shortfall as the explicit-flag run
    doc = io.read_json(out)
    assert doc["params"]["p_max"] == 13


def test_bad_config_file_exit_1(tmp_path):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text('{"k_max": "two"}')
    assert main(["--config", str(cfg_path), "pairs"]) == 1
