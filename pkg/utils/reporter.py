"""
Reporter utility for smilesqa runs
Handles stage status lines on the console and atomic artifact files (JSON, CSV,
Excel, text) plus the run manifest
"""

import hashlib
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, TextIO, Union

import pandas as pd

PathLike = Union[str, Path]


def _atomic(path: PathLike, write: Callable[[str], None]) -> str:
    """Run `write(tmp_path)` then move the temp file over `path`"""
    target = Path(path)
    if target.parent and not target.parent.exists():
        os.makedirs(target.parent, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=str(target.parent or "."))
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    return str(target)


def sha256_of(path: PathLike) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


class RunReporter:
    """
    Handles all reporting for one CLI run
    - Colored stage lines on stderr (stdout stays free for data)
    - Atomic artifact writers
    - Stage tracking echoed into the run manifest
    """

    def __init__(self, quiet: bool = False, stream: Optional[TextIO] = None):
        """
        Initialize the reporter

        Args:
            quiet: Suppress console lines; artifacts are still written
            stream: Console stream, stderr by default
        """
        self.quiet = quiet
        self.stream = stream
        self.stages: List[Dict[str, str]] = []
        self.outputs: List[str] = []
        self.pass_count = 0
        self.fail_count = 0

    def log_stage(self, stage: str, result: str, details: str = "") -> None:
        """
        Record a stage outcome

        Args:
            stage: Stage name, usually the subcommand step
            result: PASS, FAIL or INFO
            details: One-line description
        """
        self.stages.append({"stage": stage, "result": result, "details": details})
        if result == "PASS":
            self.pass_count += 1
        elif result == "FAIL":
            self.fail_count += 1
        if self.quiet:
            return
        color = self._get_status_color(result)
        line = f"{color}[{result}]{self._reset_color()} {stage}"
        if details:
            line += f": {details}"
        print(line, file=self.stream or sys.stderr)

    def _get_status_color(self, status: str) -> str:
        colors = {
            "PASS": "\033[92m",  # Green
            "FAIL": "\033[91m",  # Red
            "INFO": "\033[94m",  # Blue
        }
        return colors.get(status, "\033[0m")

    def _reset_color(self) -> str:
        return "\033[0m"

    def _track(self, path: str) -> str:
        self.outputs.append(path)
        return path

    def write_text(self, path: PathLike, text: str) -> str:
        def write(tmp: str) -> None:
            with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)

        return self._track(_atomic(path, write))

    def write_lines(self, path: PathLike, lines: Iterable[str]) -> str:
        return self.write_text(path, "".join(f"{line}\n" for line in lines))

    def write_json(self, path: PathLike, data: Any) -> str:
        return self.write_text(path, json.dumps(data, indent=2, ensure_ascii=False) + "\n")

    def write_csv(self, path: PathLike, frame: pd.DataFrame, index: bool = False, header_line: Optional[str] = None) -> str:
        """CSV via pandas, optionally preceded by a '#' header line"""
        body = frame.to_csv(index=index, lineterminator="\n")
        return self.write_text(path, (header_line + "\n" if header_line else "") + body)

    def write_excel(self, path: PathLike, sheets: Dict[str, pd.DataFrame]) -> str:
        """One sheet per frame, header row bold and frozen"""
        from openpyxl.styles import Font

        def write(tmp: str) -> None:
            with pd.ExcelWriter(Path(tmp), engine="openpyxl") as writer:
                for name, frame in sheets.items():
                    frame.to_excel(writer, sheet_name=name[:31], index=False)
                    worksheet = writer.sheets[name[:31]]
                    for cell in worksheet[1]:
                        cell.font = Font(bold=True)
                    worksheet.freeze_panes = "A2"

        return self._track(_atomic(path, write))

    def write_table(self, path: PathLike, frame: pd.DataFrame, sheet: str = "Report") -> str:
        """Table in the format its suffix names: .json (records), .xlsx or CSV"""
        suffix = Path(path).suffix.lower()
        if suffix == ".json":
            return self.write_json(path, json.loads(frame.to_json(orient="records")))
        if suffix == ".xlsx":
            return self.write_excel(path, {sheet: frame})
        return self.write_csv(path, frame)

    def write_manifest(
        self, output: PathLike, subcommand: str, config: Dict[str, Any], inputs: Iterable[PathLike], version: str
    ) -> str:
        """
        Write `<output>.manifest.json` next to the primary artifact

        Returns:
            Path to the manifest
        """
        manifest = {
            "subcommand": subcommand,
            "version": version,
            "config": config,
            "inputs": {str(p): sha256_of(p) for p in inputs if p and os.path.isfile(p)},
            "outputs": list(self.outputs),
            "stages": list(self.stages),
            "created": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        }
        path = f"{output}.manifest.json"

        def write(tmp: str) -> None:
            with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")

        return _atomic(path, write)

    def print_summary(self, title: str = "SMILESQA RUN SUMMARY") -> None:
        if self.quiet:
            return
        out = self.stream or sys.stderr
        print("\n" + "=" * 80, file=out)
        print(f"🧪 {title}", file=out)
        print("=" * 80, file=out)
        print(f"Stages: {len(self.stages)}", file=out)
        print(f"✅ Passed: {self.pass_count}", file=out)
        print(f"❌ Failed: {self.fail_count}", file=out)
        for path in self.outputs:
            print(f"📄 {path}", file=out)
        print("=" * 80, file=out)
