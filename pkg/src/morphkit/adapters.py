"""Line-delimited JSON transport to external helper processes.

Landmark detectors, embedding extractors, and generators are separate
programs: the toolkit writes one JSON request per line to the child's
stdin and reads exactly one JSON response line back.  Any framing
violation (EOF, non-JSON, nonzero exit) poisons the adapter; a clean
{"error": ...} response only fails the single request.
"""

from __future__ import annotations

import json
import subprocess
import threading
from collections import deque
from queue import Empty, Queue

from .errors import AdapterError


class LineJsonAdapter:
    """One child process speaking the line-JSON protocol, one request in flight."""

    def __init__(self, command, timeout: float = 60.0):
        self.command = list(command)
        self.timeout = timeout
        self._lock = threading.Lock()
        self._broken: str | None = None
        self._stderr_tail: deque[str] = deque(maxlen=50)
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise AdapterError(f"cannot launch adapter {self.command!r}: {exc}") from exc
        self._lines: Queue = Queue()
        self._reader = threading.Thread(target=self._read_stdout, daemon=True)
        self._reader.start()
        self._err_reader = threading.Thread(target=self._read_stderr, daemon=True)
        self._err_reader.start()

    def _read_stdout(self) -> None:
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def _read_stderr(self) -> None:
        for line in self._proc.stderr:
            self._stderr_tail.append(line.rstrip("\n"))

    def _fail(self, message: str) -> AdapterError:
        self._broken = message
        tail = "; ".join(list(self._stderr_tail)[-3:])
        if tail:
            message = f"{message} (stderr: {tail})"
        return AdapterError(message)

    def request(self, obj: dict, timeout: float | None = None) -> dict:
        """Send one request object, return the decoded response object.

        Raises AdapterError on transport failures and when the adapter
        answers {"error": ...}.
        """
        wait = self.timeout if timeout is None else timeout
        with self._lock:
            if self._broken:
                raise AdapterError(f"adapter unusable after earlier failure: {self._broken}")
            if self._proc.poll() is not None:
                raise self._fail(
                    f"adapter {self.command[0]!r} exited with code {self._proc.returncode}"
                )
            try:
                self._proc.stdin.write(json.dumps(obj) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                self._proc.wait()
                raise self._fail(
                    f"adapter {self.command[0]!r} closed its input "
                    f"(exit code {self._proc.returncode})"
                ) from None
            try:
                line = self._lines.get(timeout=wait)
            except Empty:
                self._proc.kill()
                raise self._fail(
                    f"adapter {self.command[0]!r} timed out after {wait:g}s"
                ) from None
            if line is None:
                self._proc.wait()
                raise self._fail(
                    f"adapter {self.command[0]!r} ended output "
                    f"(exit code {self._proc.returncode})"
                )
            try:
                response = json.loads(line)
            except json.JSONDecodeError:
                raise self._fail(
                    f"adapter {self.command[0]!r} wrote a malformed line: {line[:200]!r}"
                ) from None
            if not isinstance(response, dict):
                raise self._fail(
                    f"adapter {self.command[0]!r} response is not an object: {line[:200]!r}"
                )
        if "error" in response:
            raise AdapterError(f"adapter {self.command[0]!r} error: {response['error']}")
        return response

    def close(self) -> None:
        """Shut the child down; repeated calls are harmless."""
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._reader.join(timeout=1)
        self._err_reader.join(timeout=1)

    def __enter__(self) -> "LineJsonAdapter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()
