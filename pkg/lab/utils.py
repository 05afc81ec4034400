import logging

from asgiref.sync import async_to_sync
from channels.layers import get_channel_layer
from django.utils import timezone

from .models import ConfigResult, ExperimentRun
from .serializers import ConfigResultSerializer, ExperimentRunSerializer

logger = logging.getLogger(__name__)


def run_group(run_id):
    return f'run_{run_id}'


def broadcast_run_event(run_id, event_type, data):
    """
    Send an event to everybody watching ws/runs/<run_id>/.
    Channel layer failures are logged, not raised.
    """
    channel_layer = get_channel_layer()
    if channel_layer is None:
        return
    try:
        async_to_sync(channel_layer.group_send)(
            run_group(run_id),
            {
                'type': event_type,
                'data': data,
            }
        )
    except Exception as exc:
        logger.warning("Could not broadcast %s for run %s: %s", event_type, run_id, exc)


def record_result(run, result):
    """Store one finished grid entry and announce it."""
    row = result.row
    entry = result.entry
    config = ConfigResult.objects.create(
        run=run,
        position=entry.index,
        config_id=entry.config_id,
        family=entry.family,
        pre_tokenizer=entry.level,
        vocab_size=entry.vocab_size,
        status=ConfigResult.STATUS_OK if result.status == 'ok' else ConfigResult.STATUS_FAILED,
        error=result.error,
        recall=row.get('recall'),
        precision=row.get('precision'),
        f1=row.get('f1'),
        evaluated=row.get('evaluated'),
        ctc=row.get('ctc'),
        renyi_entropy=row.get('renyi_entropy'),
        renyi_efficiency=row.get('renyi_efficiency'),
        renyi_efficiency_observed=row.get('renyi_efficiency_observed'),
        model_path=result.model_path,
    )
    broadcast_run_event(run.id, 'entry_finished', ConfigResultSerializer(config).data)
    return config


def finish_run(run, summary):
    failed = [r.entry.config_id for r in summary.failed]
    run.failed_entries = failed
    run.status = ExperimentRun.STATUS_FAILED if failed else ExperimentRun.STATUS_FINISHED
    run.finished_at = timezone.now()
    run.save()
    broadcast_run_event(run.id, 'run_finished', ExperimentRunSerializer(run).data)
    return run
