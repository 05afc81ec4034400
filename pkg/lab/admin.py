from django.contrib import admin

from .models import ConfigResult, ExperimentRun

customBranding = "Tokenizer Lab"

admin.site.site_header = customBranding
admin.site.site_title = customBranding
admin.site.index_title = "Experiment runs and tokenizer results"


class ConfigResultInline(admin.TabularInline):
    model = ConfigResult
    extra = 0
    show_change_link = True
    fields = ['position', 'config_id', 'status', 'recall', 'precision', 'f1', 'ctc', 'renyi_efficiency']
    readonly_fields = fields
    can_delete = False


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ['__str__', 'seed', 'status', 'started_at', 'finished_at']
    list_filter = ['status', 'started_at']
    search_fields = ['name', 'manifest_path', 'output_dir']
    readonly_fields = ['started_at']
    date_hierarchy = 'started_at'
    inlines = [ConfigResultInline]


@admin.register(ConfigResult)
class ConfigResultAdmin(admin.ModelAdmin):
    list_display = ['config_id', 'run', 'family', 'pre_tokenizer', 'vocab_size', 'status', 'f1', 'ctc']
    list_filter = ['family', 'pre_tokenizer', 'vocab_size', 'status']
    search_fields = ['config_id', 'error']
    raw_id_fields = ['run']

    fieldsets = (
        ('Configuration', {
            'fields': ('run', 'position', 'config_id', 'family', 'pre_tokenizer', 'vocab_size', 'model_path')
        }),
        ('MorphScore', {
            'fields': ('recall', 'precision', 'f1', 'evaluated')
        }),
        ('Intrinsic', {
            'fields': ('ctc', 'renyi_entropy', 'renyi_efficiency', 'renyi_efficiency_observed')
        }),
        ('Outcome', {
            'fields': ('status', 'error')
        }),
    )

    def get_queryset(self, request):
        qs = super().get_queryset(request)
        return qs.select_related('run')
