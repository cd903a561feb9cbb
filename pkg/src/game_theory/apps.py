from django.apps import AppConfig
from django.utils.translation import gettext_lazy as _


class GameTheoryConfig(AppConfig):
    name = 'game_theory'
    default_auto_field = 'django.db.models.BigAutoField'
    verbose_name = _('Game Theory')

    def ready(self) -> None:
        __import__('game_theory.signals')
