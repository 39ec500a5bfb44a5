"""Operator command line: dataset synthesis, training, evaluation, pattern
tools, headless game simulation, log replay, and the server."""

from __future__ import annotations

import asyncio
import json
import math
import sys
import tempfile
from pathlib import Path

import click

from . import __version__
from .diagram import diagram_to_svg, render_pattern
from .errors import GenjikoError
from .features import PreprocessFlags, WindowConfig
from .genjimon import Partition, enumerate_partitions
from .model import (
    ModelConfig,
    TrainConfig,
    evaluate,
    load_model,
    save_model,
    train,
    train_centroid,
)
from .sensing import (
    build_synth_dataset,
    load_manifest,
    parse_recording,
    serialize_recording,
    synth_recording,
)

EXIT_DOMAIN_ERROR = 1


def emit(payload: dict, as_json: bool, human: str | None = None):
    if as_json:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        click.echo(human if human is not None else json.dumps(payload, indent=2, sort_keys=True))


def fail(exc: Exception, as_json: bool):
    if as_json:
        click.echo(json.dumps({"error": str(exc)}, sort_keys=True))
    else:
        click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_DOMAIN_ERROR)


def parse_window(value: str) -> WindowConfig:
    w, _, s = value.partition("x")
    return WindowConfig(int(w), int(s))


def parse_flags(value: str) -> PreprocessFlags:
    diff = False
    highpass = None
    scale = False
    for part in filter(None, value.split(",")):
        if part == "diff":
            diff = True
        elif part == "scale":
            scale = True
        elif part.startswith("highpass:"):
            highpass = float(part.split(":", 1)[1])
        elif part == "none":
            pass
        else:
            raise click.UsageError(f"unknown preprocessing flag {part!r}")
    return PreprocessFlags(diff=diff, highpass_hz=highpass, scale=scale)


@click.group()
@click.version_option(__version__)
def main():
    """Genji-ko scent matching game tooling."""


@main.group()
def patterns():
    """Enumerate and render the 52 Genji-mon patterns."""


@patterns.command("list")
@click.option("--json", "as_json", is_flag=True)
def patterns_list(as_json):
    entries = [
        {"rgs": p.key(), "groups": [list(g) for g in p.groups()]}
        for p in enumerate_partitions(5)
    ]
    human = "\n".join(e["rgs"] for e in entries)
    emit({"count": len(entries), "patterns": entries}, as_json, human)


@patterns.command("render")
@click.option("--rgs", required=True, help="pattern id, e.g. 00101")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--json", "as_json", is_flag=True)
def patterns_render(rgs, out, as_json):
    try:
        diagram = render_pattern(Partition.from_key(rgs))
    except GenjikoError as exc:
        fail(exc, as_json)
    out.write_text(diagram_to_svg(diagram), encoding="utf-8")
    emit({"rgs": rgs, "out": str(out), "segments": len(diagram.segments)},
         as_json, f"wrote {out}")


@main.command()
@click.option("--class-label", type=click.IntRange(0, 4), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--duration", type=float, default=300.0, show_default=True)
@click.option("--sigma", type=float, default=0.5, show_default=True)
@click.option("--environment", type=click.Choice(["indoor", "outdoor"]), default="indoor")
@click.option("--time-of-day", type=click.Choice(["morning", "evening"]), default="morning")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--json", "as_json", is_flag=True)
def synth(class_label, seed, duration, sigma, environment, time_of_day, out, as_json):
    """Write one synthetic recording as CSV plus a metadata sidecar."""
    try:
        recording = synth_recording(
            class_label, seed=seed, duration_s=duration,
            environment=environment, time_of_day=time_of_day,
            noise_sigma=sigma, recording_id=out.stem,
        )
    except GenjikoError as exc:
        fail(exc, as_json)
    csv_bytes, meta_bytes = serialize_recording(recording)
    out.write_bytes(csv_bytes)
    meta_path = out.with_name(out.stem + ".meta.json")
    meta_path.write_bytes(meta_bytes)
    emit(
        {"out": str(out), "meta": str(meta_path), "frames": len(recording)},
        as_json, f"wrote {out} ({len(recording)} frames)",
    )


@main.command()
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--train", "train_n", type=int, default=6, show_default=True)
@click.option("--test", "test_n", type=int, default=2, show_default=True)
@click.option("--duration", type=float, default=120.0, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--sigma", type=float, default=0.5, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def dataset(out, train_n, test_n, duration, seed, sigma, as_json):
    """Write a balanced synthetic dataset with a train/test manifest."""
    try:
        manifest = build_synth_dataset(
            out, train_per_class=train_n, test_per_class=test_n,
            duration_s=duration, base_seed=seed, noise_sigma=sigma,
        )
    except GenjikoError as exc:
        fail(exc, as_json)
    emit(
        {"out": str(out), "entries": len(manifest.entries)},
        as_json, f"wrote {len(manifest.entries)} recordings under {out}",
    )


@main.command("train")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--kind", type=click.Choice(["transformer", "centroid"]), default="transformer")
@click.option("--epochs", type=int, default=25, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--lr", type=float, default=1e-3, show_default=True)
@click.option("--batch", type=int, default=16, show_default=True)
@click.option("--window", default="200x100", show_default=True, help="window_len x stride")
@click.option("--flags", default="scale", show_default=True,
              help="comma list: diff, highpass:<hz>, scale, none")
@click.option("--json", "as_json", is_flag=True)
def train_cmd(manifest_path, out, kind, epochs, seed, lr, batch, window, flags, as_json):
    """Train a scent classifier and save the artifact."""
    try:
        manifest = load_manifest(manifest_path)
        window_cfg = parse_window(window)
        flag_cfg = parse_flags(flags)
        if kind == "centroid":
            model = train_centroid(manifest, window_cfg, flag_cfg, seed=seed)
            losses = []
        else:
            model = train(
                manifest,
                ModelConfig(),
                TrainConfig(lr=lr, batch_size=batch, epochs=epochs, seed=seed),
                window_cfg,
                flag_cfg,
            )
            losses = model.train_losses
        save_model(model, out)
    except GenjikoError as exc:
        fail(exc, as_json)
    emit(
        {"out": str(out), "kind": kind, "epochs": len(losses), "losses": losses},
        as_json,
        f"saved {kind} model to {out}"
        + (f" (final loss {losses[-1]:.4f})" if losses else ""),
    )


@main.command("eval")
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--split", type=click.Choice(["train", "test"]), default="test")
@click.option("--json", "as_json", is_flag=True)
def eval_cmd(model_path, manifest_path, split, as_json):
    """Window and voted accuracy with a confusion matrix."""
    try:
        model = load_model(model_path)
        metrics = evaluate(model, load_manifest(manifest_path), split)
    except GenjikoError as exc:
        fail(exc, as_json)
    human = (
        f"window accuracy {metrics.window_accuracy:.4f}, "
        f"voted accuracy {metrics.voted_accuracy:.4f} over "
        f"{len(metrics.per_recording)} recordings"
    )
    emit(metrics.to_json(), as_json, human)


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--recording", "recording_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--stream", is_flag=True, help="deliver frames at paced speed")
@click.option("--speedup", type=float, default=10.0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def infer(model_path, recording_path, stream, speedup, as_json):
    """Windowed predictions and the accumulated vote for one recording."""
    from .model.evaluation import raw_windows_for
    from .model.voting import Prediction, VoteState, accumulate_vote, vote_result
    from .sensing.stream import FrameStream
    from .server.sensing import RoundSensor

    try:
        model = load_model(model_path)
        meta_path = recording_path.with_name(recording_path.stem + ".meta.json")
        recording = parse_recording(recording_path.read_bytes(), meta_path.read_bytes())
        windows_out = []
        if stream:
            sensor = RoundSensor(model)

            async def on_window(index, prediction, state):
                windows_out.append({"window": index, "probs": list(prediction.probs)})

            asyncio.run(sensor.consume(
                FrameStream(recording, speedup if speedup > 0 else math.inf), on_window
            ))
            state = sensor.state
        else:
            state = VoteState()
            probs = model.predict_batch(raw_windows_for(model, recording.values))
            for index, row in enumerate(probs):
                prediction = Prediction.from_array(row)
                state = accumulate_vote(state, prediction)
                windows_out.append({"window": index, "probs": [float(p) for p in row]})
        voted = vote_result(state)
    except GenjikoError as exc:
        fail(exc, as_json)
    payload = {
        "recording": str(recording_path),
        "windows": windows_out,
        "vote_counts": list(state.counts),
        "voted_class": voted,
    }
    emit(payload, as_json, f"{len(windows_out)} windows, voted class {voted}")


@main.command()
@click.option("--script", "script_path", type=click.Path(exists=True, path_type=Path),
              required=True, help="JSON: sequence labels, judgments, optional revisions")
@click.option("--model", "model_path", type=click.Path(exists=True, path_type=Path))
@click.option("--data-dir", type=click.Path(file_okay=False, path_type=Path),
              help="run against an existing server data dir instead of a scratch one")
@click.option("--token", default=None,
              help="join with an existing token (requires --data-dir)")
@click.option("--json", "as_json", is_flag=True)
def simulate(script_path, model_path, data_dir, token, as_json):
    """Play a scripted full game against an in-process server."""
    if token is not None and data_dir is None:
        raise click.UsageError("--token only makes sense with --data-dir")
    try:
        report = asyncio.run(_simulate(script_path, model_path, data_dir, token))
    except GenjikoError as exc:
        fail(exc, as_json)
    human = (
        f"player {report['player_rgs']} vs truth {report['truth_rgs']}: "
        f"{report['score']['pair_matches']}/10 pairs, "
        f"exact={report['score']['exact']}"
    )
    emit(report, as_json, human)


async def _simulate(
    script_path: Path, model_path: Path | None, data_dir: Path | None, token: str | None
) -> dict:
    from .server import ServerConfig, build_service

    script = json.loads(script_path.read_text(encoding="utf-8"))
    judgments = script.get("judgments")
    if not isinstance(judgments, list) or len(judgments) != 4:
        raise GenjikoError("script needs a 'judgments' list for rounds 2..5")
    revisions = {int(k): v for k, v in script.get("revisions", {}).items()}
    with tempfile.TemporaryDirectory() as scratch:
        config = ServerConfig(
            data_dir=str(data_dir) if data_dir else scratch,
            model_path=str(model_path) if model_path else None,
            sensing_speedup=float("inf"),
            sensing_duration_s=float(script.get("sensing_duration_s", 15.0)),
            sequences={"scripted": script.get("sequence", [0, 0, 1, 0, 1])},
        )
        service = build_service(config, require_model=False)
        join_token = token or service.tokens.create("scripted").token
        reveals = []

        async def sink(message):
            if message["type"] == "reveal":
                reveals.append(message["payload"])

        session = await service.create_session(join_token)
        sid = session.session_id
        await service.connect(sid, sink)
        messages = [{"type": "start_calibration"}]
        messages += [{"type": "calibration_next"}] * 5
        messages += [{"type": "done_smelling"}]
        for round_no, judgment in zip(range(2, 6), judgments):
            messages += [
                {"type": "done_smelling"},
                {"type": "propose_judgment", "payload": {"judgment": judgment}},
            ]
            if round_no in revisions:
                messages.append(
                    {"type": "revise_judgment", "payload": {"judgment": revisions[round_no]}}
                )
            messages.append({"type": "confirm_judgment"})
        messages.append({"type": "acknowledge_reveal"})
        for message in messages:
            message["v"] = 1
            await service.handle_message(sid, message)
        if not reveals:
            raise GenjikoError("game did not reach the reveal (check the script)")
        return reveals[0]


@main.command()
@click.option("--events", "events_path", type=click.Path(exists=True, path_type=Path),
              required=True)
@click.option("--json", "as_json", is_flag=True)
def replay(events_path, as_json):
    """Reconstruct a session from its event log and summarize it."""
    from .server.persistence import SessionLogStore, _registry_from_creation
    from .session import replay as replay_events

    try:
        store = SessionLogStore(events_path.parent.parent if
                                events_path.parent.name == "sessions" else events_path.parent)
        events = store.read_events(events_path)
        registry = _registry_from_creation(events)
        session = replay_events(events, registry)
    except GenjikoError as exc:
        fail(exc, as_json)
    payload = {
        "session_id": session.session_id,
        "phase": session.phase.to_json(),
        "confirmed": [j.to_json() for j in session.confirmed],
        "events": len(session.events),
        "utterances": len(session.utterances),
    }
    if session.phase.kind not in ("briefing", "calibration"):
        payload["player_rgs"] = session.confirmed_partition().key()
    emit(payload, as_json,
         f"session {session.session_id} in phase {session.phase} "
         f"({len(session.events)} events)")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@click.option("--json", "as_json", is_flag=True, hidden=True)
def serve(config_path, as_json):
    """Run the session server."""
    from .server import load_config
    from .server.app import serve as run_server

    try:
        config = load_config(config_path)
        run_server(config)
    except GenjikoError as exc:
        fail(exc, as_json)


if __name__ == "__main__":
    main()
