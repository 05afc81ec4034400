import json
import logging

from channels.db import database_sync_to_async
from channels.generic.websocket import AsyncWebsocketConsumer

from .models import ExperimentRun
from .serializers import ExperimentRunSerializer
from .utils import run_group

logger = logging.getLogger(__name__)


class RunProgressConsumer(AsyncWebsocketConsumer):
    """
    WebSocket consumer streaming the progress of one experiment run
    URL: ws://localhost:8000/ws/runs/<run_id>/

    On connect the current run state is sent as `run_state`; afterwards every
    finished grid entry arrives as `entry_finished` and the end of the run as
    `run_finished`.
    """

    async def connect(self):
        self.run_id = self.scope['url_route']['kwargs']['run_id']
        self.room_group_name = run_group(self.run_id)

        await self.channel_layer.group_add(
            self.room_group_name,
            self.channel_name
        )
        await self.accept()
        logger.debug("Watcher connected to run %s", self.run_id)

        run_data = await self.get_run_data()
        if run_data is None:
            logger.warning("No run %s; closing progress socket", self.run_id)
            await self.send(text_data=json.dumps({'type': 'error', 'error': 'Run not found'}))
            await self.close(code=4004)
            return
        await self.send(text_data=json.dumps({
            'type': 'run_state',
            'data': run_data
        }))

    async def disconnect(self, close_code):
        if hasattr(self, 'room_group_name'):
            await self.channel_layer.group_discard(
                self.room_group_name,
                self.channel_name
            )

    async def receive(self, text_data):
        """
        Only ping/pong and explicit state refreshes are understood
        """
        try:
            data = json.loads(text_data)
        except json.JSONDecodeError:
            return
        if data.get('type') == 'ping':
            await self.send(text_data=json.dumps({'type': 'pong'}))
        elif data.get('type') == 'refresh':
            await self.send(text_data=json.dumps({
                'type': 'run_state',
                'data': await self.get_run_data()
            }))

    # Receive message from run group
    async def entry_finished(self, event):
        await self.send(text_data=json.dumps({
            'type': 'entry_finished',
            'data': event['data']
        }))

    async def run_finished(self, event):
        await self.send(text_data=json.dumps({
            'type': 'run_finished',
            'data': event['data']
        }))

    @database_sync_to_async
    def get_run_data(self):
        try:
            run = ExperimentRun.objects.get(id=self.run_id)
            return ExperimentRunSerializer(run).data
        except ExperimentRun.DoesNotExist:
            return None
