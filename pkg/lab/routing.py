from django.urls import re_path

from .consumers import RunProgressConsumer

websocket_urlpatterns = [
    re_path(r'ws/runs/(?P<run_id>\d+)/$', RunProgressConsumer.as_asgi()),
]
