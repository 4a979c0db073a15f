"""DetectorApp: live terminal view of the run-length filter stepping through a series"""

from typing import Optional, Set

import numpy as np
from textual.app import App
from textual.binding import Binding
from textual.containers import Horizontal, Vertical
from textual.widgets import Footer, Header, Static

from lib.bocd_errors import BocdError
from models.changepoint_info import ChangepointInfo
from models.detector_config import DetectorConfig
from models.segmentation_result import TraceStep
from services.detector import StreamingDetector, build_detector
from ui.changepoint_sidebar import ChangepointSidebar
from ui.run_length_panel import RunLengthPanel


class DetectorApp(App[None]):
    """Steps a detector on a timer; modal run-length drops become sidebar entries"""

    BINDINGS = [
        Binding("space", "toggle_pause", "Pause/Resume"),
        Binding("n", "step_once", "Step"),
        Binding("up", "sidebar_up", "Previous CP"),
        Binding("down", "sidebar_down", "Next CP"),
        Binding("q", "quit", "Quit"),
    ]

    CSS = """
    ChangepointSidebar {
        width: 30%;
        border: round $primary;
        margin: 0 1 0 0;
    }

    ChangepointSidebar:focus-within {
        border: round $accent;
    }

    ChangepointEntry {
        height: 2;
        margin: 0 0 1 0;
    }

    ChangepointEntry.--confident {
        color: $success;
    }

    ChangepointEntry.--tentative {
        color: $warning;
    }

    ChangepointEntry.--selected {
        background: $primary 30%;
    }

    .main-content {
        width: 70%;
        border: round $secondary;
    }

    #status {
        height: 1;
        width: 100%;
        background: $primary 20%;
        color: $primary;
        padding: 0 1;
        text-style: bold;
    }

    RunLengthPanel {
        padding: 0 1;
    }
    """

    def __init__(self, config: DetectorConfig, data: np.ndarray, interval: float = 0.05,
                 detector: Optional[StreamingDetector] = None, autostart: bool = True):
        super().__init__()
        self.config = config
        self.data = np.asarray(data, dtype=float).reshape(len(data), -1)
        self.interval = interval
        self.detector = detector
        self.omega: Optional[float] = None
        self.paused = not autostart
        self.error: Optional[str] = None
        self._previous_mode = 0
        self._reported: Set[int] = set()

    def compose(self):
        yield Header()
        with Horizontal():
            yield ChangepointSidebar(id="sidebar")
            with Vertical(classes="main-content"):
                yield Static("", id="status")
                yield RunLengthPanel(id="runlength")
        yield Footer()

    async def on_mount(self) -> None:
        self.title = f"robust-bocd: {self.config.model} ({self.config.method})"
        if self.detector is None:
            try:
                self.detector, self.omega = build_detector(self.config, self.data)
            except BocdError as exc:
                self._set_error(f"setup failed: {exc}")
                return
        self._refresh_status()
        self.set_interval(self.interval, self._tick)

    @property
    def finished(self) -> bool:
        return self.detector is not None and self.detector.time >= len(self.data)

    async def _tick(self) -> None:
        if not self.paused:
            await self.advance()

    async def advance(self) -> Optional[TraceStep]:
        """Feed the next observation, if any, and refresh the view"""
        if self.detector is None or self.finished or self.error:
            return None
        x = self.data[self.detector.time]
        try:
            record = self.detector.push(x)
        except BocdError as exc:
            self._set_error(f"t={self.detector.time + 1}: {exc}")
            return None

        self.query_one(RunLengthPanel).show_step(record)
        mode = self.detector.state.modal_run_length()
        start = record.t - mode
        if mode < self._previous_mode and start > 1 and start not in self._reported:
            self._reported.add(start)
            changepoint = ChangepointInfo(
                time=start,
                detected_at=record.t,
                run_length=mode,
                probability=float(np.exp(record.log_probs.max())),
            )
            self.log.info(f"changepoint at t={start} seen at t={record.t}")
            await self.query_one(ChangepointSidebar).add_changepoint(changepoint)
        self._previous_mode = mode
        self._refresh_status()
        return record

    def _refresh_status(self) -> None:
        t = self.detector.time if self.detector else 0
        state = "done" if self.finished else ("paused" if self.paused else "running")
        omega = "" if self.omega is None else f"  omega={self.omega:.4g}"
        self.query_one("#status", Static).update(f"t={t}/{len(self.data)}  {state}{omega}")

    def _set_error(self, message: str) -> None:
        self.error = message
        self.paused = True
        self.log.error(message)
        self.query_one("#status", Static).update(f"error: {message}")

    def action_toggle_pause(self) -> None:
        self.paused = not self.paused
        if not self.error:
            self._refresh_status()

    async def action_step_once(self) -> None:
        self.paused = True
        await self.advance()
        if not self.error:
            self._refresh_status()

    def action_sidebar_up(self) -> None:
        self.query_one(ChangepointSidebar).select_previous()

    def action_sidebar_down(self) -> None:
        self.query_one(ChangepointSidebar).select_next()
