import os
import re
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Any

import markdown
import pandas as pd

REPORT_STATUSES = ["pass", "fail", "discrepancy", "info"]


@dataclass
class ReportEntry:
    """One checked property of a verification suite"""
    name: str
    status: str
    detail: str = ""
    data: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in REPORT_STATUSES:
            raise ValueError(f"Unknown report status: {self.status}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'status': self.status,
            'detail': self.detail,
            'data': self.data
        }


@dataclass
class VerificationReport:
    """Outcome of a suite: entries plus the discrepancies logged along the way"""
    suite: str
    entries: List[ReportEntry] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def add(self, name: str, passed: bool, detail: str = "", **data: Any) -> ReportEntry:
        entry = ReportEntry(name, "pass" if passed else "fail", detail, dict(data))
        self.entries.append(entry)
        return entry

    def note(self, name: str, detail: str = "", **data: Any) -> ReportEntry:
        entry = ReportEntry(name, "info", detail, dict(data))
        self.entries.append(entry)
        return entry

    def discrepancy(self, name: str, detail: str, **data: Any) -> ReportEntry:
        entry = ReportEntry(name, "discrepancy", detail, dict(data))
        self.entries.append(entry)
        return entry

    def extend(self, other: "VerificationReport") -> None:
        for entry in other.entries:
            prefixed = ReportEntry(f"{other.suite}/{entry.name}", entry.status, entry.detail, entry.data)
            self.entries.append(prefixed)

    @property
    def passed(self) -> bool:
        return all(e.status != "fail" for e in self.entries)

    @property
    def failures(self) -> List[ReportEntry]:
        return [e for e in self.entries if e.status == "fail"]

    @property
    def discrepancies(self) -> List[ReportEntry]:
        return [e for e in self.entries if e.status == "discrepancy"]

    def summary(self) -> Dict[str, int]:
        counts = {status: 0 for status in REPORT_STATUSES}
        for entry in self.entries:
            counts[entry.status] += 1
        counts['total'] = len(self.entries)
        return counts

    def to_dict(self) -> Dict[str, Any]:
        return {
            'suite': self.suite,
            'passed': self.passed,
            'summary': self.summary(),
            'entries': [e.to_dict() for e in self.entries],
            'discrepancies': [e.name for e in self.discrepancies]
        }


class Exporter:
    """
    Renders verification reports, R tensors and section tables.
    Handles JSON, text, Markdown, HTML and LaTeX emission.
    """

    def __init__(self, engine_version: str = "", config_hash: str = ""):
        self.engine_version = engine_version
        self.config_hash = config_hash

        self.html_template = """
<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>{title}</title>
    <style>
        {css_styles}
    </style>
</head>
<body>
    <article class="udf-report">
        <header class="report-header">
            <h1 class="report-title">{title}</h1>
            <p class="report-meta">{meta}</p>
        </header>
        <div class="report-content">
            {content}
        </div>
    </article>
</body>
</html>
        """.strip()

        self.css_styles = """
        body {
            font-family: 'Georgia', 'Times New Roman', serif;
            line-height: 1.6;
            color: #2c3e50;
            background-color: #f8f9fa;
        }

        .udf-report {
            max-width: 960px;
            margin: 0 auto;
            background: white;
            padding: 2rem;
        }

        .report-title {
            font-size: 2rem;
            border-bottom: 3px solid #667eea;
        }

        .report-meta {
            color: #6c757d;
            font-style: italic;
        }

        table {
            border-collapse: collapse;
            width: 100%;
        }

        td, th {
            border: 1px solid #e9ecef;
            padding: 0.3rem 0.6rem;
            font-family: 'Courier New', monospace;
        }
        """.strip()

        self.status_icons = {
            'pass': '✅',
            'fail': '❌',
            'discrepancy': '⚠️',
            'info': 'ℹ️'
        }

    # Reports

    def generation_metadata(self, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        """Timestamp-free metadata so identical configurations give identical output"""
        meta = {
            'generator': f'udf-engine {self.engine_version}'.strip(),
            'config_hash': self.config_hash
        }
        if extra:
            meta.update(extra)
        return meta

    def report_to_json(self, report: VerificationReport) -> str:
        payload = {
            'generation_metadata': self.generation_metadata(report.metadata),
            'report': report.to_dict()
        }
        return json.dumps(payload, indent=2, ensure_ascii=False)

    def report_frame(self, report: VerificationReport) -> pd.DataFrame:
        rows = [
            {'check': e.name, 'status': e.status, 'detail': e.detail}
            for e in report.entries
        ]
        return pd.DataFrame(rows, columns=['check', 'status', 'detail'])

    def report_to_text(self, report: VerificationReport) -> str:
        lines = [f"Suite: {report.suite}"]
        frame = self.report_frame(report)
        if not frame.empty:
            lines.append(frame.to_string(index=False))
        summary = report.summary()
        lines.append(
            f"{summary['pass']} passed, {summary['fail']} failed, "
            f"{summary['discrepancy']} discrepancies, {summary['info']} notes"
        )
        return "\n".join(lines)

    def report_to_markdown(self, report: VerificationReport) -> str:
        lines = [f"# Verification: {report.suite}", ""]
        summary = report.summary()
        lines.append(f"**{summary['pass']}** passed, **{summary['fail']}** failed, "
                     f"**{summary['discrepancy']}** discrepancies")
        lines.append("")
        lines.append("| Status | Check | Detail |")
        lines.append("|---|---|---|")
        for entry in report.entries:
            icon = self.status_icons[entry.status]
            detail = entry.detail.replace("|", "\\|")
            lines.append(f"| {icon} {entry.status} | {entry.name} | {detail} |")
        if report.discrepancies:
            lines.append("")
            lines.append("## Discrepancies")
            lines.append("")
            for entry in report.discrepancies:
                lines.append(f"- **{entry.name}**: {entry.detail}")
        return "\n".join(lines)

    def generate_html(self, report: VerificationReport) -> str:
        body = markdown.markdown(self.report_to_markdown(report), extensions=['tables'])
        meta = f"config {self.config_hash}" if self.config_hash else "udf-engine"
        return self.html_template.format(
            title=f"Verification: {report.suite}",
            css_styles=self.css_styles,
            meta=meta,
            content=body
        )

    def render_report(self, report: VerificationReport, fmt: str) -> str:
        if fmt == "json":
            return self.report_to_json(report)
        if fmt == "text":
            return self.report_to_text(report)
        if fmt == "markdown":
            return self.report_to_markdown(report)
        if fmt == "html":
            return self.generate_html(report)
        raise ValueError(f"Unsupported report format: {fmt}")

    # R tensors

    def render_r(self, r_tensor: Any, fmt: str, config: Optional[Dict[str, Any]] = None) -> str:
        if fmt == "json":
            payload = {
                'generation_metadata': self.generation_metadata(config),
                **r_tensor.to_json()
            }
            return json.dumps(payload, indent=2, ensure_ascii=False)
        if fmt == "text":
            return r_tensor.text()
        if fmt == "latex":
            return r_tensor.latex()
        if fmt == "markdown":
            return "\n".join(f"- $\\hbar^{{{k}}}$: ${line}$" for k, line in r_tensor.latex_lines())
        raise ValueError(f"Unsupported format for R: {fmt}")

    # Tables

    def table_frame(self, rows: List[Dict[str, Any]], columns: List[str]) -> pd.DataFrame:
        return pd.DataFrame(rows, columns=columns)

    def render_table(self, frame: pd.DataFrame, fmt: str, title: str = "") -> str:
        if fmt in ("text", "markdown") and frame.empty:
            return f"{title}\n(empty)" if title else "(empty)"
        if fmt == "text":
            body = frame.to_string(index=False)
            return f"{title}\n{body}" if title else body
        if fmt == "json":
            payload = {
                'generation_metadata': self.generation_metadata(),
                'title': title,
                'rows': frame.to_dict(orient='records')
            }
            return json.dumps(payload, indent=2, ensure_ascii=False)
        if fmt == "markdown":
            head = "| " + " | ".join(frame.columns) + " |"
            rule = "|" + "---|" * len(frame.columns)
            rows = ["| " + " | ".join(str(v) for v in row) + " |" for row in frame.itertuples(index=False)]
            return "\n".join(([f"## {title}", ""] if title else []) + [head, rule] + rows)
        if fmt == "latex":
            spec = "l" * len(frame.columns)
            lines = [f"\\begin{{tabular}}{{{spec}}}", " & ".join(frame.columns) + " \\\\", "\\hline"]
            for row in frame.itertuples(index=False):
                lines.append(" & ".join(f"${v}$" if isinstance(v, str) else str(v) for v in row) + " \\\\")
            lines.append("\\end{tabular}")
            return "\n".join(lines)
        raise ValueError(f"Unsupported table format: {fmt}")

    def section_frame(
        self,
        section: Any,
        latex: bool = False,
        m_max: Optional[int] = None,
        n_max: Optional[int] = None
    ) -> pd.DataFrame:
        """(m, n) indexed coefficient table of a Weyl section; with bounds, zero cells are listed too"""
        if m_max is None or n_max is None:
            cells = [index for index, _ in section.items()]
        else:
            cells = [(m, n) for m in range(m_max + 1) for n in range(n_max + 1)]
        rows = []
        for m, n in cells:
            coeff = section.coefficient(m, n)
            rows.append({'m': m, 'n': n, 'coefficient': coeff.latex() if latex else coeff.text()})
        return self.table_frame(rows, ['m', 'n', 'coefficient'])

    # Files

    def export_all_formats(
        self,
        report: VerificationReport,
        output_dir: str = "exports"
    ) -> Dict[str, str]:
        """
        Export a report as JSON, Markdown and HTML

        Returns:
            Dictionary mapping format names to file paths
        """

        os.makedirs(output_dir, exist_ok=True)

        base_filename = self._slugify(report.suite)
        if self.config_hash:
            base_filename = f"{base_filename}_{self.config_hash[:8]}"

        export_paths = {}
        writers = [
            ('JSON', 'json', self.report_to_json),
            ('Markdown', 'md', self.report_to_markdown),
            ('HTML', 'html', self.generate_html)
        ]
        for label, extension, render in writers:
            path = os.path.join(output_dir, f"{base_filename}.{extension}")
            with open(path, 'w', encoding='utf-8') as f:
                f.write(render(report))
            export_paths[label] = path

        return export_paths

    def _slugify(self, text: str) -> str:
        """Convert text to a file-friendly slug"""

        slug = text.lower()
        slug = re.sub(r'[^\w\s-]', '', slug)
        slug = re.sub(r'\s+', '_', slug)
        slug = re.sub(r'-+', '-', slug)
        slug = slug.strip('-_')

        return slug[:30] if len(slug) > 30 else slug or "report"
