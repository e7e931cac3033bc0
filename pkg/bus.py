# bus.py: synchronous in-process event bus for run progress and metrics
from collections import defaultdict
from typing import Callable, Dict, List

from logger import get_logger

log = get_logger("BYZGRAD.Bus")

Handler = Callable[[str, dict], None]


class EventBus:
    """In-memory publish/subscribe with decorator support. Delivery is synchronous and in order."""

    def __init__(self):
        self._handlers: Dict[str, List[Handler]] = defaultdict(list)

    def subscribe(self, topic=None):
        """
        Supports:
          @bus.subscribe("topic")   -> register handler for one topic
          @bus.subscribe("*")       -> register wildcard handler
          @bus.subscribe            -> register wildcard handler
        """
        if callable(topic):
            self._handlers["*"].append(topic)
            return topic

        def decorator(func: Handler) -> Handler:
            self._handlers[topic or "*"].append(func)
            return func

        return decorator

    def add_handler(self, topic: str, handler: Handler) -> None:
        self._handlers[topic].append(handler)

    def remove_handler(self, topic: str, handler: Handler) -> None:
        try:
            self._handlers[topic].remove(handler)
        except ValueError:
            pass

    def clear(self) -> None:
        self._handlers.clear()

    def publish(self, topic: str, message: dict) -> int:
        """Deliver to topic handlers, then wildcard handlers. Returns the delivery count."""
        delivered = 0
        for handler in [*self._handlers.get(topic, []), *self._handlers.get("*", [])]:
            handler(topic, message)
            delivered += 1
        if not delivered:
            log.debug("bus_unrouted", topic=topic)
        return delivered

