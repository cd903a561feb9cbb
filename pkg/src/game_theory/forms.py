from typing import Any, Dict, List

from django import forms
from django.utils.translation import gettext_lazy as _

from game_theory import models
from game_theory.engine import br_iter, errors, kernel


class NestedJSONForm(forms.ModelForm):
    """
    Edits keys of a JSON model field as separate form fields named
    ``_<key>``; empty fields are left out of the JSON value.
    """
    json_field: str
    nested_fields: List[str]

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        try:
            data = self.initial[self.json_field]
        except KeyError:
            return
        for k in self.nested_fields:
            try:
                self.fields[f'_{k}'].initial = data[k]
            except KeyError:
                pass

    def clean(self) -> Dict[str, Any]:
        cd = self.cleaned_data
        cd[self.json_field] = {k: cd[f'_{k}'] for k in self.nested_fields
                               if cd.get(f'_{k}') not in (None, '')}
        return cd


class SolverRunForm(NestedJSONForm):
    json_field = 'params'
    nested_fields = ['epsilon', 'learning_rate', 'lr_schedule']

    class Meta:
        model = models.SolverRun
        fields = '__all__'

    params = forms.JSONField(disabled=True,
                             required=False,
                             widget=forms.HiddenInput(),
                             initial={})
    _epsilon = forms.FloatField(
        label=_('Epsilon'), required=False, min_value=0.0, max_value=1.0,
        help_text=_('Exploration of outcome sampling MCCFR'))
    _learning_rate = forms.FloatField(
        label=_('Learning rate'), required=False, min_value=0.0,
        help_text=_('Exploitability descent step size'))
    _lr_schedule = forms.ChoiceField(
        label=_('Learning rate schedule'), required=False,
        choices=[('', '---')] + [(s, s) for s in br_iter.SCHEDULES])

    def clean_game(self) -> str:
        game = self.cleaned_data['game']
        try:
            kernel.load_game(game)
        except errors.GameTheoryError as e:
            raise forms.ValidationError(str(e))
        return game
