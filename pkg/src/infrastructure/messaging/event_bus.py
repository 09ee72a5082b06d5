"""
SBCC Event Bus - Decoder Diagnostics Publication
In-process pub/sub carrying per-block decisions, window extensions and resynchronizations
from the window decoder to the simulator and any other listener
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)


class EventType(Enum):
    """Decoder event kinds"""
    BLOCK_DECIDED = "block_decided"
    WINDOW_EXTENDED = "window_extended"
    RESYNC = "resync"


@dataclass
class DecoderEvent:
    """Event structure for decoder diagnostics"""
    event_id: str
    event_type: EventType
    t: int
    payload: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "event_id": self.event_id,
            "event_type": self.event_type.value,
            "t": self.t,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DecoderEvent":
        return cls(
            event_id=data["event_id"],
            event_type=EventType(data["event_type"]),
            t=data["t"],
            payload=data["payload"],
        )


Subscriber = Callable[[DecoderEvent], None]


class EventBus:
    """Synchronous event bus; subscriber failures are logged and never reach the publisher"""

    def __init__(self):
        self.subscribers: Dict[Optional[EventType], List[Subscriber]] = {}
        self._sequence = itertools.count()

    def subscribe(self, callback: Subscriber, event_type: Optional[EventType] = None):
        """Subscribe to one event type, or to every event when event_type is None"""
        self.subscribers.setdefault(event_type, []).append(callback)

    def unsubscribe(self, callback: Subscriber, event_type: Optional[EventType] = None):
        callbacks = self.subscribers.get(event_type, [])
        if callback in callbacks:
            callbacks.remove(callback)

    def publish(self, event_type: EventType, t: int, payload: Dict[str, Any]) -> DecoderEvent:
        """Build an event with a sequential id and deliver it"""
        event = DecoderEvent(
            event_id=f"{event_type.value}_{t}_{next(self._sequence)}",
            event_type=event_type,
            t=t,
            payload=payload,
        )
        self.publish_event(event)
        return event

    def publish_event(self, event: DecoderEvent) -> int:
        """Deliver an event; returns the number of callbacks that ran cleanly"""
        delivered = 0
        for callback in self.subscribers.get(event.event_type, []) + self.subscribers.get(None, []):
            try:
                callback(event)
                delivered += 1
            except Exception as e:
                logger.error(f"Subscriber error on {event.event_id}: {e}")
        return delivered


def log_event(event: DecoderEvent):
    """Subscriber that writes every event to the module logger"""
    if event.event_type == EventType.BLOCK_DECIDED:
        logger.debug(f"t={event.t} decided: {event.payload}")
    else:
        logger.info(f"t={event.t} {event.event_type.value}: {event.payload}")
