import json
import subprocess
import sys

import pytest

from amrforge.cli import main
from amrforge.graph import is_isomorphic
from amrforge.lexicon import load_lexicon
from amrforge.merge import CaptionAmrSet, build_meta_amr, load_whitelist
from amrforge.penman import parse_penman


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return str(path)


def read_jsonl(path):
    return [json.loads(line) for line in open(path, encoding="utf-8")]


def test_validate_ok(corpus_path, capsys):
    assert main(["validate", str(corpus_path)]) == 0
    assert "5 graphs OK" in capsys.readouterr().out


def test_validate_broken(tmp_path, corpus_record, capsys):
    bad = dict(corpus_record, image_id="bad", amrs=["(g / giraffe :ARG0 (d / dog)"])
    path = write_jsonl(tmp_path / "c.jsonl", [corpus_record, bad])
    assert main(["validate", path]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and "record bad" in err[0] and "at offset" in err[0]


def test_validate_empty(tmp_path, capsys):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    assert main(["validate", str(path)]) == 1
    assert "empty corpus" in capsys.readouterr().err


def test_malformed_jsonl(tmp_path, capsys):
    path = tmp_path / "x.jsonl"
    path.write_text("{not json\n", encoding="utf-8")
    assert main(["validate", str(path)]) == 1


def test_duplicate_ids(tmp_path, corpus_record):
    path = write_jsonl(tmp_path / "d.jsonl", [corpus_record, corpus_record])
    assert main(["validate", path]) == 1


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["merge"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["score", "a", "b", "--jobs", "0"])
    assert exc.value.code == 2


def test_merge_fixture(tmp_path, corpus_path, caption_graphs):
    out = tmp_path / "meta.jsonl"
    assert main(["merge", str(corpus_path), "-o", str(out)]) == 0
    (rec,) = read_jsonl(out)
    expected = build_meta_amr(CaptionAmrSet("giraffes", caption_graphs), load_whitelist(), load_lexicon())
    assert is_isomorphic(parse_penman(rec["meta_amr"]), expected.graph)
    assert rec["refinement_log"] == [["rock", "stone"], ["leaf", "foliage"]]


def test_merge_deterministic_and_parallel(tmp_path, corpus_record):
    records = [dict(corpus_record, image_id=f"img{i}", amrs=corpus_record["amrs"][i % 5:] + corpus_record["amrs"][:i % 5])
               for i in range(12)]
    path = write_jsonl(tmp_path / "c.jsonl", records)
    outs = []
    for i, jobs in enumerate(("1", "1", "3")):
        out = tmp_path / f"m{i}.jsonl"
        assert main(["merge", path, "-o", str(out), "--jobs", jobs]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_merge_single_caption_empty_lexicon(tmp_path, whitelist_all):
    text = "(s / stand-01 :ARG1 (g / giraffe :mod (t / tall)) :snt9 (f / field))"
    path = write_jsonl(tmp_path / "c.jsonl", [{"image_id": "x", "amrs": [text]}])
    out = tmp_path / "m.jsonl"
    assert main(["merge", path, "-o", str(out), "--lexicon", "none", "--whitelist", whitelist_all]) == 0
    assert is_isomorphic(parse_penman(read_jsonl(out)[0]["meta_amr"]), parse_penman(text))


@pytest.fixture
def whitelist_all(tmp_path):
    p = tmp_path / "wl.txt"
    p.write_text(":ARG0\n:ARG1\n:mod\n:snt9\n", encoding="utf-8")
    return str(p)


def test_merge_failure_strict(tmp_path, corpus_record, capsys):
    records = [{"image_id": "bad", "amrs": ["(g / giraffe"]}, corpus_record]
    path = write_jsonl(tmp_path / "c.jsonl", records)
    out = tmp_path / "m.jsonl"
    assert main(["merge", path, "-o", str(out)]) == 1
    assert [r["image_id"] for r in read_jsonl(out)] == ["giraffes"]
    assert main(["merge", path, "-o", str(out), "--strict"]) == 1
    assert read_jsonl(out) == []


def test_score_identity(tmp_path, corpus_path, capsys):
    out, summary = tmp_path / "s.jsonl", tmp_path / "sum.json"
    preds = write_jsonl(tmp_path / "p.jsonl", [{"image_id": "giraffes", "predicted_amr": parse_penman_text(corpus_path, 2)}])
    assert main(["score", preds, str(corpus_path), "-o", str(out), "--summary", str(summary)]) == 0
    (row,) = read_jsonl(out)
    assert row["smatch"] == row["sembleu1"] == row["sembleu2"] == 1.0 and row["argmax_ref"] == 2
    s = json.loads(summary.read_text())
    assert s["mean_smatch"] == s["mean_sembleu1"] == s["mean_sembleu2"] == 1.0


def parse_penman_text(corpus_path, i):
    return json.loads(corpus_path.read_text().splitlines()[0])["amrs"][i]


def test_score_reproducible(tmp_path, corpus_path):
    meta = tmp_path / "m.jsonl"
    main(["merge", str(corpus_path), "-o", str(meta)])
    reports = []
    for i in range(2):
        out = tmp_path / f"s{i}.jsonl"
        assert main(["score", str(meta), str(corpus_path), "-o", str(out), "--seed", "7"]) == 0
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]


def test_score_unmatched(tmp_path, corpus_path, capsys):
    preds = write_jsonl(tmp_path / "p.jsonl", [{"image_id": "nope", "predicted_amr": "(g / giraffe)"}])
    out = str(tmp_path / "s.jsonl")
    assert main(["score", preds, str(corpus_path), "-o", out]) == 0
    assert "unmatched image_id nope" in capsys.readouterr().err
    assert main(["score", preds, str(corpus_path), "-o", out, "--strict"]) == 1


def test_score_bad_metric(tmp_path, corpus_path):
    assert main(["score", str(corpus_path), str(corpus_path), "--metrics", "bleu"]) == 2


def test_stats_outputs(tmp_path, corpus_path):
    out = tmp_path / "st"
    assert main(["stats", str(corpus_path), "--out-dir", str(out), "--top-n", "3"]) == 0
    assert (out / "relations.csv").read_text().splitlines() == ["role,count", ":location,6", ":ARG1,4", ":mod,4"]
    assert (out / "whitelist.txt").read_text().split() == [":location", ":ARG1", ":mod"]
    cats = (out / "categories.csv").read_text().splitlines()
    assert any(line.startswith("Entities,Animal,1,5,") for line in cats)
    cx = json.loads((out / "complexity.json").read_text())
    assert cx["num_graphs"] == 1 and 0 <= cx["type_reduction"] <= 1


def test_stats_scene_graphs(tmp_path, corpus_path):
    sg = write_jsonl(tmp_path / "sg.jsonl", [{"image_id": "1", "objects": ["giraffe", "tree"], "relations": [["giraffe", "near", "tree"]]}])
    out = tmp_path / "st"
    assert main(["stats", str(corpus_path), "--out-dir", str(out), "--scene-graphs", sg]) == 0
    assert "Entities,Animal,1,1,50.0000" in (out / "sg_categories.csv").read_text()


@pytest.mark.parametrize("fmt", ["penman", "linearized"])
def test_export_import_round_trip(tmp_path, corpus_path, caption_graphs, fmt):
    exported, imported = tmp_path / "e.txt", tmp_path / "i.jsonl"
    assert main(["export", str(corpus_path), "-o", str(exported), "--format", fmt]) == 0
    if fmt == "linearized":
        assert len(exported.read_text().splitlines()) == 5
    assert main(["import", str(exported), "-o", str(imported), "--format", fmt]) == 0
    (rec,) = read_jsonl(imported)
    assert rec["image_id"] == "giraffes"
    assert all(is_isomorphic(parse_penman(t), g) for t, g in zip(rec["amrs"], caption_graphs))


def test_import_truncated_line(tmp_path, corpus_path, capsys):
    exported = tmp_path / "e.txt"
    main(["export", str(corpus_path), "-o", str(exported), "--format", "linearized"])
    lines = exported.read_text().splitlines()
    lines[0] = lines[0].rsplit(" ", 1)[0]
    lines[1] = "<p0> giraffe )"
    exported.write_text("\n".join(lines) + "\n")
    imported = tmp_path / "i.jsonl"
    assert main(["import", str(exported), "-o", str(imported), "--format", "linearized"]) == 1
    (rec,) = read_jsonl(imported)
    assert len(rec["amrs"]) == 4
    assert rec["repairs"] == ["line 1: inserted 1 ')' at end of sequence"]
    assert "line 2" in capsys.readouterr().err
    assert main(["import", str(exported), "-o", str(imported), "--format", "linearized", "--strict"]) == 1


def test_module_entry_point(corpus_path):
    r = subprocess.run([sys.executable, "-m", "amrforge", "validate", str(corpus_path)], capture_output=True, text=True)
    assert r.returncode == 0 and "5 graphs OK" in r.stdout
    r = subprocess.run([sys.executable, "-m", "amrforge", "frobnicate"], capture_output=True, text=True)
    assert r.returncode == 2
