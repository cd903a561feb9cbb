from logging import LoggerAdapter, getLogger
from typing import Any, MutableMapping, Tuple

from django.utils.translation import gettext_lazy as _


class ContextAdapter(LoggerAdapter):
    """
    Prefixes messages with the owner's log context, evaluated per message
    because the owner may still be initializing when the adapter is made.
    """

    def process(self, msg: Any, kwargs: MutableMapping[str, Any]
                ) -> Tuple[Any, MutableMapping[str, Any]]:
        context = self.extra['owner'].log_context()  # type: ignore
        if context:
            msg = f'[{context}] {msg}'
        return msg, kwargs


class LoggerMixin:
    """
    A mixin for logger injection.

    Should not be used with Django models, because Logger contains
    non-serializable threading.Lock object.
    """

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)  # type: ignore
        cls = self.__class__
        self.logger = ContextAdapter(
            getLogger(f'{cls.__module__}.{cls.__name__}'), {'owner': self})

    def log_context(self) -> str:
        """ Short label of what this object works on, e.g. a game."""
        return ''


# Adding missing translations for django-model-utils TimeStampedModel
_('created')
_('modified')
