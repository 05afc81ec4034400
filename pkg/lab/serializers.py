from rest_framework import serializers

from .models import ConfigResult, ExperimentRun


class ConfigResultSerializer(serializers.ModelSerializer):
    class Meta:
        model = ConfigResult
        fields = [
            'id', 'position', 'config_id', 'family', 'pre_tokenizer', 'vocab_size', 'status', 'error',
            'recall', 'precision', 'f1', 'evaluated',
            'ctc', 'renyi_entropy', 'renyi_efficiency', 'renyi_efficiency_observed', 'model_path',
        ]


class ExperimentRunSerializer(serializers.ModelSerializer):
    results = ConfigResultSerializer(many=True, read_only=True)

    class Meta:
        model = ExperimentRun
        fields = ['id', 'name', 'manifest_path', 'manifest', 'output_dir', 'seed', 'status',
                  'started_at', 'finished_at', 'failed_entries', 'results']


class ExperimentRunListSerializer(serializers.ModelSerializer):
    """Lightweight serializer for run lists without results"""
    result_count = serializers.IntegerField(source='results.count', read_only=True)

    class Meta:
        model = ExperimentRun
        fields = ['id', 'name', 'output_dir', 'seed', 'status', 'started_at', 'finished_at', 'result_count']


class WordScoreRequestSerializer(serializers.Serializer):
    gold = serializers.ListField(child=serializers.IntegerField(min_value=1), allow_empty=False)
    pred = serializers.ListField(child=serializers.IntegerField(min_value=1), allow_empty=False)
    word = serializers.CharField(required=False, default='', allow_blank=True)


class CorrelationRequestSerializer(serializers.Serializer):
    method = serializers.ChoiceField(choices=['pearson', 'spearman'], default='pearson')
    x = serializers.ListField(child=serializers.FloatField(), min_length=3)
    y = serializers.ListField(child=serializers.FloatField(), min_length=3)

    def validate(self, data):
        if len(data['x']) != len(data['y']):
            raise serializers.ValidationError("x and y must have the same length")
        return data
