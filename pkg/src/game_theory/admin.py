from typing import Any, Callable, Optional, TypeVar, Union

from django.contrib import admin
from django.db.models import QuerySet
from django.http import HttpRequest, HttpResponse
from django.utils.functional import Promise
from django.utils.html import format_html
from django.utils.translation import gettext_lazy as _

from game_theory import forms, helpers, models

C = TypeVar("C", bound=Callable)


def short_description(name: Union[str, Promise]) -> Callable[[C], C]:
    """ Sets short description for function."""

    def inner(func: C) -> C:
        setattr(func, 'short_description', name)
        return func

    return inner


class TracePointInline(admin.TabularInline):
    model = models.TracePoint
    extra = 0
    can_delete = False
    readonly_fields = ('iteration', 'metric', 'value', 'seconds')

    def has_add_permission(self, request: HttpRequest,
                           obj: Optional[models.SolverRun] = None) -> bool:
        return False


# noinspection PyUnresolvedReferences
@admin.register(models.SolverRun)
class SolverRunAdmin(admin.ModelAdmin):
    form = forms.SolverRunForm
    list_display = ('game', 'algorithm', 'iterations', 'status_display',
                    'nash_conv', 'created')
    list_filter = ('status', 'algorithm')
    search_fields = ('game', '=basename')
    actions = ['solve']
    readonly_fields = ('created', 'modified', 'status', 'error', 'task_id',
                       'basename', 'nash_conv', 'policy_preview')
    exclude = ('policy',)
    inlines = [TracePointInline]

    @short_description(_("Status"))
    def status_display(self, obj: models.SolverRun) -> str:
        return obj.get_status_display()

    # noinspection PyUnusedLocal
    @short_description(_('Send solve task'))
    def solve(self,
              request: HttpRequest,
              queryset: "QuerySet[models.SolverRun]") -> None:
        for solver_run in queryset:
            helpers.send_solve_task(solver_run)

    @short_description(_('Policy'))
    def policy_preview(self, obj: models.SolverRun) -> str:
        if not obj.policy:
            return ""
        return format_html('<pre>{}</pre>', obj.policy)

    def add_view(self,
                 request: HttpRequest,
                 form_url: str = '',
                 extra_context: Any = None
                 ) -> HttpResponse:
        inlines, self.inlines = self.inlines, []
        try:
            return super().add_view(request, form_url, extra_context)
        finally:
            self.inlines = inlines
