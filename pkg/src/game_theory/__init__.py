default_app_config = 'game_theory.apps.GameTheoryConfig'
