"""CSV and YAML output of example bundles and single runs."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from rich.console import Console
from rich.table import Table

from src.experiments.examples import ExampleBundle
from src.fields.io import save_grid
from src.solvers.runner import RunResult
from src.utils.file_utils import ensure_directory, write_csv_rows
from src.utils.serialization_utils import save_yaml

TRACE_FIELDS = ["n", "t", "E", "E_tilde", "rel_l2_err", "residual", "E_continuous"]
SUMMARY_FIELDS = [
    "run", "scheme", "space", "dim_u", "terminal_rel_l2_err", "max_rel_l2_err", "E_final",
    "max_residual", "curve_gap_to_implicit_vh", "dt_bound", "gamma", "dt_exceeds_bound",
]
TRACE_UNITS = "t=model time; E=squared L2 plus energy norms; rel_l2_err=relative to reference"


def write_trace(result: RunResult, path: Path, metadata: Dict[str, Any]) -> Path:
    return write_csv_rows(path, result.trace.rows, TRACE_FIELDS, metadata={**metadata, "units": TRACE_UNITS})


def write_snapshots(result: RunResult, directory: Path, name: str, fine_n: int, metadata: Dict[str, Any]) -> List[Path]:
    """Fine nodal u of each kept level as a (fine_n+1) x (fine_n+1) grid."""
    side = fine_n + 1
    paths = []
    for n, values in sorted(result.snapshots.items()):
        path = directory / f"snapshot_{name}_n{n:05d}.csv"
        paths.append(save_grid(values.reshape(side, side), path, {**metadata, "run": name, "n": n}))
    return paths


class ExperimentReportGenerator:
    """Writes an example bundle as config.yaml, summary.csv, traces and snapshots."""

    def __init__(self, bundle: ExampleBundle):
        self.bundle = bundle
        self.config_hash = bundle.config.hash

    @property
    def metadata(self) -> Dict[str, Any]:
        return {"example": self.bundle.example, "config_hash": self.config_hash}

    def generate_report(self, output_dir: Optional[Path] = None, snapshots: Optional[bool] = None) -> Path:
        """Write every file of the bundle and return the directory."""
        config = self.bundle.config
        if output_dir is None:
            label = f"example{self.bundle.example}" if self.bundle.example is not None else "example"
            output_dir = config.output.output_dir / label
        output_dir = ensure_directory(output_dir)
        if snapshots is None:
            snapshots = config.output.write_snapshots

        save_yaml({**config.get_config_dict(), "config_hash": self.config_hash}, output_dir / "config.yaml")
        write_csv_rows(
            output_dir / "summary.csv", self.bundle.summary_rows(), SUMMARY_FIELDS,
            metadata={**self.metadata, "units": "errors relative L2; dt in model time"},
        )
        for name, result in self.bundle.results.items():
            write_trace(result, output_dir / f"trace_{name}.csv", {**self.metadata, "run": name})
            if snapshots:
                write_snapshots(result, output_dir, name, self.bundle.problem.grid.fine_n, self.metadata)
        self.bundle.output_dir = output_dir
        return output_dir


def render_summary(rows: Sequence[Dict[str, Any]], title: str = "Summary", console: Optional[Console] = None) -> None:
    """Print summary rows as a rich table."""
    console = console or Console()
    columns = [key for key in SUMMARY_FIELDS if any(row.get(key) is not None for row in rows)]
    table = Table(title=title)
    for key in columns:
        table.add_column(key, justify="left" if key in ("run", "scheme", "space") else "right")
    for row in rows:
        table.add_row(*(_cell(row.get(key)) for key in columns))
    console.print(table)


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4e}"
    return str(value)
