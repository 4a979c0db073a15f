"""ChangepointEntry widget: one detected changepoint in the sidebar"""

from textual.widget import Widget
from textual.widgets import Label

from models.changepoint_info import ChangepointInfo


class ChangepointEntry(Widget):
    """Sidebar row for a single changepoint"""

    def __init__(self, changepoint: ChangepointInfo, **kwargs):
        super().__init__(**kwargs)
        self._changepoint = changepoint
        self._is_selected = False

    @property
    def changepoint(self) -> ChangepointInfo:
        return self._changepoint

    @property
    def is_selected(self) -> bool:
        return self._is_selected

    @is_selected.setter
    def is_selected(self, value: bool):
        self._is_selected = value
        self.add_class("--selected" if value else "--unselected")
        self.remove_class("--unselected" if value else "--selected")

    @property
    def is_confident(self) -> bool:
        return self._changepoint.probability >= 0.5

    def compose(self):
        cp = self._changepoint
        indicator = "●" if self.is_confident else "○"
        yield Label(f"{indicator} t={cp.time}", classes="changepoint-time")
        detail = f"seen at {cp.detected_at} (+{cp.delay}), r={cp.run_length}, p={cp.probability:.2f}"
        yield Label(detail, classes="changepoint-detail")

    def on_mount(self):
        self.add_class("--confident" if self.is_confident else "--tentative")
