from pathlib import Path

from django.http import HttpResponse, JsonResponse
from rest_framework import status
from rest_framework.decorators import api_view, permission_classes
from rest_framework.permissions import AllowAny
from rest_framework.response import Response

from morphotok import __version__

from . import stats
from .exceptions import MorphotokError
from .models import ExperimentRun
from .morphscore import score_word
from .serializers import (
    ConfigResultSerializer,
    CorrelationRequestSerializer,
    ExperimentRunListSerializer,
    ExperimentRunSerializer,
    WordScoreRequestSerializer,
)


def index(request):
    return JsonResponse({
        'service': 'morphotok',
        'version': __version__,
        'endpoints': ['/api/runs/', '/api/morphscore/word/', '/api/stats/correlation/'],
    })


@api_view(['GET'])
@permission_classes([AllowAny])
def run_list(request):
    """
    Get list of all experiment runs (lightweight)
    """
    runs = ExperimentRun.objects.all()
    serializer = ExperimentRunListSerializer(runs, many=True)
    return Response(serializer.data)


@api_view(['GET'])
@permission_classes([AllowAny])
def run_detail(request, run_id):
    """
    Get one run with all of its configuration results
    """
    try:
        run = ExperimentRun.objects.get(id=run_id)
        serializer = ExperimentRunSerializer(run)
        return Response(serializer.data)
    except ExperimentRun.DoesNotExist:
        return Response({'error': 'Run not found'}, status=status.HTTP_404_NOT_FOUND)


@api_view(['GET'])
@permission_classes([AllowAny])
def run_results(request, run_id):
    """
    Get the configuration results of a run
    Query params: family, pre_tokenizer, vocab_size
    """
    try:
        run = ExperimentRun.objects.get(id=run_id)
    except ExperimentRun.DoesNotExist:
        return Response({'error': 'Run not found'}, status=status.HTTP_404_NOT_FOUND)

    results = run.results.all()
    for field in ('family', 'pre_tokenizer'):
        value = request.GET.get(field)
        if value:
            results = results.filter(**{field: value})
    vocab_size = request.GET.get('vocab_size')
    if vocab_size:
        if not vocab_size.isdigit():
            return Response({'error': 'vocab_size must be an integer'}, status=status.HTTP_400_BAD_REQUEST)
        results = results.filter(vocab_size=int(vocab_size))

    serializer = ConfigResultSerializer(results, many=True)
    return Response(serializer.data)


@api_view(['GET'])
@permission_classes([AllowAny])
def run_table(request, run_id):
    """
    Download the run's analysis.csv
    """
    try:
        run = ExperimentRun.objects.get(id=run_id)
    except ExperimentRun.DoesNotExist:
        return Response({'error': 'Run not found'}, status=status.HTTP_404_NOT_FOUND)

    path = Path(run.analysis_csv)
    if not path.is_file():
        return Response({'error': 'Analysis table not written yet'}, status=status.HTTP_404_NOT_FOUND)
    response = HttpResponse(path.read_bytes(), content_type='text/csv; charset=utf-8')
    response['Content-Disposition'] = f'attachment; filename="{run.name}-analysis.csv"'
    return response


@api_view(['POST'])
@permission_classes([AllowAny])
def morphscore_word(request):
    """
    Score one word's predicted boundaries against its gold boundaries
    POST: { "gold": [6, 8], "pred": [4, 6], "word": "..." }
    Returns: { "recall": 0.5, "precision": 0.5, "f1": 0.5, ... }
    """
    serializer = WordScoreRequestSerializer(data=request.data)
    if not serializer.is_valid():
        return Response({'error': serializer.errors}, status=status.HTTP_400_BAD_REQUEST)
    data = serializer.validated_data
    try:
        result = score_word(data['gold'], data['pred'], word=data['word'])
    except MorphotokError as e:
        return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)
    return Response(result.as_dict())


@api_view(['POST'])
@permission_classes([AllowAny])
def stats_correlation(request):
    """
    Pearson or Spearman correlation with its two-sided p-value
    POST: { "method": "spearman", "x": [...], "y": [...] }
    """
    serializer = CorrelationRequestSerializer(data=request.data)
    if not serializer.is_valid():
        return Response({'error': serializer.errors}, status=status.HTTP_400_BAD_REQUEST)
    data = serializer.validated_data
    method = stats.spearman if data['method'] == 'spearman' else stats.pearson
    try:
        result = method(data['x'], data['y'])
    except MorphotokError as e:
        return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)
    return Response(result.as_dict())
