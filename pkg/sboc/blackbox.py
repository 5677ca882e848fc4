"""
Auswertung externer Black-Box-Programme.

Zwei Modi:

- ``per-call``: pro Auswertung ein Prozessaufruf ``<exe> x1 x2 ... xN``,
  Ergebnis ist genau eine Zahl auf stdout.
- ``persistent``: ein langlebiger Prozess; pro Auswertung eine Zeile
  ``x1 x2 ... xN`` auf stdin, Antwort eine Zeile mit einer Zahl auf stdout.

Zahlen werden mit ``repr(float)`` formatiert (kürzeste exakt rundlauffähige
Darstellung, wissenschaftliche Notation möglich).
"""

import logging
import queue
import subprocess
import threading
from typing import List, Optional

import numpy as np

from .core import InvalidConfig, SbocError

logger = logging.getLogger(__name__)

MODES = ("per-call", "persistent")


class BlackBoxError(SbocError, RuntimeError):
    pass


class Timeout(BlackBoxError):
    pass


class NonNumericOutput(BlackBoxError):
    pass


class NonZeroExit(BlackBoxError):
    pass


def format_arguments(x_raw) -> List[str]:
    return [repr(float(v)) for v in np.asarray(x_raw, dtype=float).reshape(-1)]


def parse_value(output: str) -> float:
    """Genau eine endliche Zahl, sonst NonNumericOutput."""
    tokens = output.split()
    if len(tokens) != 1:
        raise NonNumericOutput(f"Erwartet genau eine Zahl, erhalten: {output.strip()[:200]!r}")
    try:
        value = float(tokens[0])
    except ValueError as e:
        raise NonNumericOutput(f"Keine Zahl: {tokens[0][:200]!r}") from e
    if not np.isfinite(value):
        raise NonNumericOutput(f"Nicht-endlicher Wert: {tokens[0]!r}")
    return value


class BlackBoxEvaluator:
    def __init__(self, executable: str, mode: str = "per-call", timeout: float = 60.0):
        """
        Args:
            executable: Pfad zum ausführbaren Programm
            mode: "per-call" oder "persistent"
            timeout: Zeitlimit je Auswertung in Sekunden
        """
        if mode not in MODES:
            raise InvalidConfig(f"Unbekannter Modus '{mode}' ({', '.join(MODES)})")
        if not timeout > 0:
            raise InvalidConfig(f"Timeout muss > 0 sein, nicht {timeout}")
        self.executable = str(executable)
        self.mode = mode
        self.timeout = float(timeout)
        self.calls = 0
        self.argument_log: List[np.ndarray] = []
        self._process: Optional[subprocess.Popen] = None
        self._lines: Optional[queue.Queue] = None

    def __call__(self, x_raw) -> float:
        return blackbox_evaluate(self, x_raw)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()

    # === persistenter Modus ===

    def _start(self):
        logger.info(f"Starte persistenten Prozess: {self.executable}")
        self._process = subprocess.Popen(
            [self.executable],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines = queue.Queue()
        threading.Thread(target=self._pump, args=(self._process.stdout, self._lines), daemon=True).start()

    @staticmethod
    def _pump(stream, lines: queue.Queue):
        for line in iter(stream.readline, ""):
            lines.put(line)
        lines.put(None)

    def exchange(self, request: str) -> str:
        if self._process is None:
            self._start()
        try:
            self._process.stdin.write(request + "\n")
            self._process.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise NonZeroExit(f"Prozess nimmt keine Eingaben mehr an (Exit-Code {self._process.poll()})") from e
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty as e:
            self.close()
            raise Timeout(f"Keine Antwort innerhalb von {self.timeout:g} s") from e
        if line is None:
            code = self._process.wait()
            raise NonZeroExit(f"Prozess beendet (Exit-Code {code}) ohne Antwort")
        return line

    def close(self):
        if self._process is None:
            return
        try:
            self._process.stdin.close()
        except OSError:
            pass
        try:
            self._process.wait(timeout=self.timeout)
        except subprocess.TimeoutExpired:
            self._process.kill()
            self._process.wait()
        self._process = None


def blackbox_evaluate(evaluator: BlackBoxEvaluator, x_raw) -> float:
    """Eine Auswertung über das Wire-Protokoll; der Wert wird unverändert zurückgegeben."""
    x = np.asarray(x_raw, dtype=float).reshape(-1)
    arguments = format_arguments(x)
    evaluator.argument_log.append(x.copy())

    try:
        if evaluator.mode == "per-call":
            output = _call_once(evaluator, arguments)
        else:
            output = evaluator.exchange(" ".join(arguments))
        value = parse_value(output)
    except BlackBoxError as e:
        logger.error(f"✗ Black-Box-Auswertung fehlgeschlagen: {evaluator.executable} {' '.join(arguments)} -> {e}")
        raise

    evaluator.calls += 1
    return value


def _call_once(evaluator: BlackBoxEvaluator, arguments: List[str]) -> str:
    try:
        completed = subprocess.run(
            [evaluator.executable, *arguments],
            capture_output=True,
            text=True,
            timeout=evaluator.timeout,
        )
    except subprocess.TimeoutExpired as e:
        raise Timeout(f"Zeitlimit {evaluator.timeout:g} s überschritten") from e
    except OSError as e:
        raise NonZeroExit(f"Programm nicht ausführbar: {e}") from e

    if completed.returncode != 0:
        stderr = completed.stderr.strip()[-500:]
        raise NonZeroExit(f"Exit-Code {completed.returncode}" + (f": {stderr}" if stderr else ""))
    return completed.stdout
