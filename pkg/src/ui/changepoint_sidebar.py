"""ChangepointSidebar widget listing changepoints found so far"""

from typing import List, Optional

from textual.containers import Vertical, VerticalScroll
from textual.widget import Widget

from models.changepoint_info import ChangepointInfo
from ui.changepoint_entry import ChangepointEntry


class ChangepointSidebar(Widget):
    """Left sidebar with one entry per detected changepoint"""

    can_focus = True

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self._changepoints: List[ChangepointInfo] = []
        self._entries: List[ChangepointEntry] = []
        self._selected_index: int = -1

    def compose(self):
        with Vertical():
            yield VerticalScroll(id="changepoint-list")

    @property
    def changepoints(self) -> List[ChangepointInfo]:
        return list(self._changepoints)

    async def add_changepoint(self, changepoint: ChangepointInfo) -> None:
        """Append a changepoint and select it"""
        entry = ChangepointEntry(changepoint=changepoint)
        self._changepoints.append(changepoint)
        self._entries.append(entry)
        await self.query_one("#changepoint-list").mount(entry)
        self._selected_index = len(self._entries) - 1
        self._update_selection()

    def get_selected(self) -> Optional[ChangepointInfo]:
        if 0 <= self._selected_index < len(self._changepoints):
            return self._changepoints[self._selected_index]
        return None

    def select_next(self) -> Optional[ChangepointInfo]:
        if not self._changepoints:
            return None
        self._selected_index = (self._selected_index + 1) % len(self._changepoints)
        self._update_selection()
        return self.get_selected()

    def select_previous(self) -> Optional[ChangepointInfo]:
        if not self._changepoints:
            return None
        self._selected_index = (self._selected_index - 1) % len(self._changepoints)
        self._update_selection()
        return self.get_selected()

    def _update_selection(self):
        for i, entry in enumerate(self._entries):
            entry.is_selected = (i == self._selected_index)
