from django.db import models


class ExperimentRun(models.Model):
    name = models.CharField(max_length=200)
    manifest_path = models.CharField(max_length=500)
    manifest = models.JSONField(default=dict, blank=True)
    output_dir = models.CharField(max_length=500)
    seed = models.IntegerField(default=0)

    STATUS_PENDING = 'pending'
    STATUS_RUNNING = 'running'
    STATUS_FINISHED = 'finished'
    STATUS_FAILED = 'failed'

    STATUSES = [
        (STATUS_PENDING, 'Pending'),
        (STATUS_RUNNING, 'Running'),
        (STATUS_FINISHED, 'Finished'),
        (STATUS_FAILED, 'Finished with failures'),
    ]

    status = models.CharField(max_length=20, choices=STATUSES, default=STATUS_PENDING)
    started_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    # config ids of grid entries that raised during training or evaluation
    failed_entries = models.JSONField(default=list, blank=True)

    class Meta:
        verbose_name = "Experiment run"
        verbose_name_plural = "Experiment runs"
        ordering = ['-started_at', '-id']

    def __str__(self):
        return f"{self.name} #{self.id} ({self.status})"

    @property
    def analysis_csv(self):
        return f"{self.output_dir.rstrip('/')}/analysis.csv"


class ConfigResult(models.Model):
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='results')
    position = models.PositiveIntegerField()
    config_id = models.CharField(max_length=200)

    FAMILY_CHARACTER = 'character'
    FAMILY_WORD = 'word'
    FAMILY_MORPHEMIC = 'morphemic'
    FAMILY_BPE = 'bpe'
    FAMILY_UNIGRAM = 'unigram'

    FAMILIES = [
        (FAMILY_CHARACTER, 'Character'),
        (FAMILY_WORD, 'Word'),
        (FAMILY_MORPHEMIC, 'Morphemic'),
        (FAMILY_BPE, 'BPE'),
        (FAMILY_UNIGRAM, 'Unigram LM'),
    ]

    family = models.CharField(max_length=20, choices=FAMILIES)

    PRE_NONE = 'none'
    PRE_MORFESSOR = 'morfessor'
    PRE_ANALYZER = 'analyzer'

    PRE_TOKENIZERS = [
        (PRE_NONE, 'Whitespace only'),
        (PRE_MORFESSOR, 'MDL segmenter'),
        (PRE_ANALYZER, 'Analyzer lexicon'),
    ]

    pre_tokenizer = models.CharField(max_length=20, choices=PRE_TOKENIZERS, default=PRE_NONE)
    vocab_size = models.PositiveIntegerField(null=True, blank=True)

    STATUS_OK = 'ok'
    STATUS_FAILED = 'failed'

    STATUSES = [
        (STATUS_OK, 'OK'),
        (STATUS_FAILED, 'Failed'),
    ]

    status = models.CharField(max_length=10, choices=STATUSES, default=STATUS_OK)
    error = models.TextField(blank=True, default='')

    # MorphScore (pooled gold sets, macro averages; f1 = harmonic mean of recall and precision)
    recall = models.FloatField(null=True, blank=True)
    precision = models.FloatField(null=True, blank=True)
    f1 = models.FloatField(null=True, blank=True)
    evaluated = models.PositiveIntegerField(null=True, blank=True)

    # Intrinsic
    ctc = models.BigIntegerField(null=True, blank=True)
    renyi_entropy = models.FloatField(null=True, blank=True)
    renyi_efficiency = models.FloatField(null=True, blank=True)
    renyi_efficiency_observed = models.FloatField(null=True, blank=True)

    model_path = models.CharField(max_length=500, blank=True, default='')

    class Meta:
        verbose_name = "Configuration result"
        verbose_name_plural = "Configuration results"
        ordering = ['run', 'position']
        constraints = [
            models.UniqueConstraint(fields=['run', 'config_id'], name='unique_config_per_run'),
        ]

    def __str__(self):
        return f"{self.config_id} ({self.status})"
