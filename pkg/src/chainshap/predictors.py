"""Prediction models: inline linear, lookup-table, and external subprocess
predictors speaking a newline-delimited JSON batch protocol."""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, PredictorError


@dataclass(frozen=True)
class LinearModel:
    """f(x) = intercept + coefficients . x over continuous features."""

    intercept: float
    coefficients: tuple[float, ...]

    def predict(self, batch: np.ndarray) -> np.ndarray:
        x = np.asarray(batch, dtype=float)
        return self.intercept + x @ np.asarray(self.coefficients)

    def __len__(self):
        return len(self.coefficients)


class TableModel:
    """Output looked up from a full assignment of discrete feature values."""

    def __init__(self, outputs: Mapping[tuple, float]):
        self.outputs = dict(outputs)
        if not self.outputs:
            raise ConfigError("table model needs at least one assignment")

    def predict(self, batch: np.ndarray) -> np.ndarray:
        out = np.empty(len(batch), dtype=float)
        for r, row in enumerate(batch):
            key = tuple(row)
            try:
                out[r] = self.outputs[key]
            except KeyError:
                raise ConfigError(
                    f"table model does not cover assignment {key}"
                ) from None
        return out

    @classmethod
    def from_function(cls, feature_space, fn) -> "TableModel":
        """Materialize a function over every assignment of the feature space."""
        import itertools

        levels = [k.levels for k in feature_space.kinds]
        return cls({combo: float(fn(*combo)) for combo in itertools.product(*levels)})


class ExternalPredictor:
    """A child process answering prediction batches over stdin/stdout.

    Requests are single lines ``{"x": [[...], ...]}``; the response must be a
    single line ``{"y": [...]}`` with one value per input row, flushed per
    line. At most one request is in flight at a time.
    """

    def __init__(self, command: Sequence[str], timeout: float = 60.0):
        self.command = list(command)
        self.timeout = timeout
        self._lock = threading.Lock()
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise PredictorError(f"failed to start predictor {self.command}: {exc}")
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def predict(self, batch: np.ndarray) -> np.ndarray:
        rows = np.asarray(batch)
        if rows.ndim != 2 or len(rows) == 0:
            raise PredictorError("predictor batch must be a non-empty matrix")
        request = json.dumps({"x": rows.astype(float).tolist()})
        with self._lock:
            if self._proc.poll() is not None:
                raise PredictorError(
                    f"predictor exited with status {self._proc.returncode} "
                    "before the request"
                )
            try:
                self._proc.stdin.write(request + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                raise PredictorError(f"predictor pipe closed: {exc}")
            try:
                line = self._lines.get(timeout=self.timeout)
            except queue.Empty:
                raise PredictorError(
                    f"predictor timed out after {self.timeout}s waiting for a response"
                )
        if line is None:
            raise PredictorError(
                f"predictor exited (status {self._proc.poll()}) before responding"
            )
        try:
            payload = json.loads(line)
            values = payload["y"]
            out = np.asarray([float(v) for v in values], dtype=float)
        except (ValueError, TypeError, KeyError) as exc:
            raise PredictorError(
                f"malformed predictor response ({exc}); raw line: {line.rstrip()!r}"
            )
        if len(out) != len(rows):
            raise PredictorError(
                f"predictor returned {len(out)} values for a batch of {len(rows)}; "
                f"raw line: {line.rstrip()!r}"
            )
        return out

    def close(self):
        proc = self._proc
        if proc.stdin:
            try:
                proc.stdin.close()
            except OSError:
                pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
