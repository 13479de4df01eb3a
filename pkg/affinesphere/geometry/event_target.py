import logging
import typing

logger = logging.getLogger(__name__)


_ListenerCallable = typing.Callable[..., None]


class EventTarget:
    """Synchronous listener registry.

    Listener errors are logged and never propagate into the dispatching
    computation.
    """

    __slots__ = ("__listeners",)

    __listeners: dict[str, list[_ListenerCallable]]

    def __init__(self) -> None:
        self.__listeners = {}

    def add_listener(
        self, name: str, listener: _ListenerCallable
    ) -> typing.Callable[[], bool]:
        try:
            self.__listeners[name].append(listener)
        except KeyError:
            self.__listeners[name] = [listener]

        def unsubscribe() -> bool:
            return self.remove_listener(name, listener)

        return unsubscribe

    def remove_listener(self, name: str, listener: _ListenerCallable) -> bool:
        try:
            self.__listeners[name].remove(listener)
        except (KeyError, ValueError):
            return False

        return True

    def on_listener_exception(
        self,
        listener: _ListenerCallable,
        error: Exception,
        *,
        event_name: str,
    ) -> None:
        logger.exception(
            "listener %r raised error while handling event %r",
            listener,
            event_name,
            exc_info=error,
        )

    def dispatch_event(self, name: str, *args: typing.Any, **kwargs: typing.Any) -> int:
        """Call every listener of `name` in registration order.

        Returns the number of listeners that ran without raising.
        """
        try:
            listeners = list(self.__listeners[name])
        except KeyError:
            return 0

        ok = 0
        for listener in listeners:
            try:
                listener(*args, **kwargs)
            except Exception as e:
                self.on_listener_exception(listener, e, event_name=name)
            else:
                ok += 1
        return ok
