"""Command-line entry points: replay runs, parameter sweeps, script parsing,
and the live socket service."""

from __future__ import annotations

import json
from pathlib import Path

import click

from .config import load_config
from .errors import ParleyError
from . import harness
from .script import parse_structured_script, script_to_json


@click.group()
def main():
    """Interview copilot session engine."""


def _parse_sweep(specs: tuple[str, ...]) -> dict[str, list]:
    grid: dict[str, list] = {}
    for spec in specs:
        key, sep, values = spec.partition("=")
        if not sep:
            raise click.BadParameter(f"sweep spec {spec!r} is not key=v1,v2")
        parsed = []
        for v in values.split(","):
            try:
                parsed.append(json.loads(v))
            except json.JSONDecodeError:
                parsed.append(v)
        grid[key] = parsed
    return grid


@main.command()
@click.option("--script", "script_path", required=True,
              type=click.Path(exists=True))
@click.option("--transcript", "transcript_path", required=True,
              type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", default=None,
              type=click.Path(exists=True))
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True))
@click.option("--events", "events_path", default=None,
              type=click.Path(exists=True),
              help="JSON list of extra input events (manual selects etc.)")
@click.option("--backend", default=None)
@click.option("--report-format", type=click.Choice(["table", "structured"]),
              default="table")
@click.option("--report-dir", default=None, type=click.Path(),
              help="also write metrics.csv/.json and figures here")
def run(script_path, transcript_path, annotations_path, config_path,
        events_path, backend, report_format, report_dir):
    """Replay a recorded transcript through the engine and report metrics."""
    extra = (json.loads(Path(events_path).read_text())
             if events_path else None)
    try:
        config = load_config(config_path, backend=backend)
        session, report = harness.run(script_path, transcript_path,
                                      annotations_path, config,
                                      extra_events=extra)
    except ParleyError as exc:
        raise click.ClickException(str(exc))
    if report_format == "structured":
        click.echo(report.to_json())
    else:
        click.echo(report.to_table())
    if report_dir:
        written = harness.write_report(report, report_dir, session)
        for path in written:
            click.echo(f"wrote {path}", err=True)


@main.command()
@click.option("--script", "script_path", required=True,
              type=click.Path(exists=True))
@click.option("--transcript", "transcript_path", required=True,
              type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", default=None,
              type=click.Path(exists=True))
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True))
@click.option("--sweep", "sweep_specs", multiple=True, required=True,
              help="key=v1,v2,... (repeatable)")
@click.option("--report-format", type=click.Choice(["table", "structured"]),
              default="structured")
def sweep(script_path, transcript_path, annotations_path, config_path,
          sweep_specs, report_format):
    """Run the harness once per configuration in a parameter grid."""
    grid = _parse_sweep(sweep_specs)
    try:
        base = load_config(config_path)
        results = harness.sweep(script_path, transcript_path, grid, base,
                                annotations_path)
    except ParleyError as exc:
        raise click.ClickException(str(exc))
    for overrides, report in results:
        if report_format == "structured":
            click.echo(json.dumps({"overrides": overrides,
                                   "report": report.to_dict()},
                                  sort_keys=True))
        else:
            click.echo(f"--- {overrides}")
            click.echo(report.to_table())


@main.command("parse-script")
@click.argument("path", type=click.Path(exists=True))
def parse_script_cmd(path):
    """Parse a structured script file and print the hierarchy as JSON."""
    try:
        h = parse_structured_script(Path(path).read_text())
    except ParleyError as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(script_to_json(h), indent=2))


@main.command()
@click.option("--script", "script_path", required=True,
              type=click.Path(exists=True))
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True))
@click.option("--backend", default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8400, type=int)
@click.option("--log-file", default=None, type=click.Path())
def serve(script_path, config_path, backend, host, port, log_file):
    """Serve a live session over the protocol-1 websocket."""
    import uvicorn

    from .server import create_app

    try:
        config = load_config(config_path, backend=backend)
        app = create_app(Path(script_path).read_text(), config,
                         log_path=log_file)
    except ParleyError as exc:
        raise click.ClickException(str(exc))
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.argument("log_path", type=click.Path(exists=True))
def replay(log_path):
    """Rebuild a session from an event log and print the final snapshot."""
    from .session import replay as replay_log

    try:
        session = replay_log(log_path)
    except ParleyError as exc:
        raise click.ClickException(str(exc))
    click.echo(session.snapshot_json())


if __name__ == "__main__":
    main()
