import json

import pandas as pd
import pytest

from exporter import Exporter, ReportEntry, VerificationReport
from weyl_fedosov import build_section


@pytest.fixture
def report():
    report = VerificationReport("hopf", metadata={"degree": 2})
    report.add("relations", True, "[Y, X] = X")
    report.add("antipode", False, "S(X) mismatch")
    report.discrepancy("printed recursion", "factor 2 | normalization")
    report.note("cutoff", "degree 2")
    return report


def test_entry_rejects_unknown_status():
    with pytest.raises(ValueError):
        ReportEntry("x", "maybe")


def test_summary_counts(report):
    summary = report.summary()
    assert summary == {"pass": 1, "fail": 1, "discrepancy": 1, "info": 1, "total": 4}
    assert not report.passed
    assert [e.name for e in report.failures] == ["antipode"]


def test_discrepancies_do_not_fail():
    report = VerificationReport("fedosov")
    report.discrepancy("v-family sign", "printed sign differs")
    assert report.passed


def test_extend_prefixes_names(report):
    combined = VerificationReport("all")
    combined.extend(report)
    assert combined.entries[0].name == "hopf/relations"
    assert combined.summary()["total"] == 4


def test_json_is_deterministic(report):
    exporter = Exporter("1.0.0", "abc123")
    first = exporter.render_report(report, "json")
    assert first == exporter.render_report(report, "json")
    payload = json.loads(first)
    meta = payload["generation_metadata"]
    assert meta["config_hash"] == "abc123"
    assert meta["degree"] == 2
    assert "timestamp" not in meta
    assert payload["report"]["discrepancies"] == ["printed recursion"]


def test_text_and_markdown(report):
    exporter = Exporter()
    text = exporter.render_report(report, "text")
    assert text.startswith("Suite: hopf")
    assert "1 passed, 1 failed, 1 discrepancies, 1 notes" in text

    md = exporter.render_report(report, "markdown")
    assert "| ❌ fail | antipode | S(X) mismatch |" in md
    assert "factor 2 \\| normalization" in md
    assert "## Discrepancies" in md


def test_html_wraps_markdown(report):
    html = Exporter(config_hash="abc").render_report(report, "html")
    assert html.startswith("<!DOCTYPE html>")
    assert "<table>" in html
    assert "config abc" in html


def test_unknown_report_format(report):
    with pytest.raises(ValueError):
        Exporter().render_report(report, "pdf")


def test_render_r(r_order2):
    exporter = Exporter("1.0.0", "h")
    text = exporter.render_r(r_order2, "text")
    assert text.splitlines()[0].startswith("ħ^0:")
    assert "1 ⊗ 1" in text.splitlines()[0]
    assert "R_{0}" in exporter.render_r(r_order2, "latex")
    payload = json.loads(exporter.render_r(r_order2, "json", {"order": 2}))
    assert payload["generation_metadata"]["order"] == 2
    assert len(payload["orders"]) == 3
    with pytest.raises(ValueError):
        exporter.render_r(r_order2, "html")


def test_render_table_formats():
    exporter = Exporter()
    frame = exporter.table_frame([{"m": 0, "n": 1, "coefficient": "1/2"}], ["m", "n", "coefficient"])
    assert "1/2" in exporter.render_table(frame, "text", "t")
    md = exporter.render_table(frame, "markdown", "t")
    assert md.splitlines()[2] == "| m | n | coefficient |"
    latex = exporter.render_table(frame, "latex")
    assert latex.startswith("\\begin{tabular}{lll}")
    assert "$1/2$" in latex
    rows = json.loads(exporter.render_table(frame, "json"))["rows"]
    assert rows == [{"m": 0, "n": 1, "coefficient": "1/2"}]


def test_render_empty_table():
    frame = pd.DataFrame([], columns=["m", "n", "coefficient"])
    assert Exporter().render_table(frame, "text", "hat_f") == "hat_f\n(empty)"


def test_section_frame_lists_zero_cells():
    exporter = Exporter()
    section = build_section("u_alpha_inv", max_m=3, max_n=0)
    sparse = exporter.section_frame(section)
    full = exporter.section_frame(section, m_max=3, n_max=1)
    assert len(full) == 8
    assert len(sparse) <= len(full)
    assert "0" in set(full["coefficient"])


def test_export_all_formats(report, tmp_path):
    exporter = Exporter(config_hash="0123456789")
    paths = exporter.export_all_formats(report, str(tmp_path))
    assert set(paths) == {"JSON", "Markdown", "HTML"}
    assert paths["JSON"].endswith("hopf_01234567.json")
    for path in paths.values():
        assert (tmp_path / path.split("/")[-1]).read_text(encoding="utf-8")


@pytest.mark.parametrize("text,slug", [
    ("Appendix identities!", "appendix_identities"),
    ("", "report"),
    ("a" * 40, "a" * 30),
])
def test_slugify(text, slug):
    assert Exporter()._slugify(text) == slug
