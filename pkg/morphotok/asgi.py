"""
ASGI config for the morphotok project.

HTTP goes to Django; websockets under ws/runs/<id>/ carry run progress.
"""

import logging
import os

from django.core.asgi import get_asgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'morphotok.settings')

# Initialize Django ASGI application early to ensure the AppRegistry
# is populated before importing code that may import ORM models.
django_asgi_app = get_asgi_application()

from channels.routing import ProtocolTypeRouter, URLRouter
from lab.routing import websocket_urlpatterns

logger = logging.getLogger(__name__)

application = ProtocolTypeRouter({
    "http": django_asgi_app,
    "websocket": URLRouter(websocket_urlpatterns),
})

logger.info("ASGI application ready with %d websocket route(s)", len(websocket_urlpatterns))
