"""
URL configuration for the morphotok project.

    /          -> service index
    /api/      -> experiment runs, MorphScore and correlation endpoints
    /admin/    -> Django admin
"""
from django.contrib import admin
from django.urls import path, include

from lab.views import index

urlpatterns = [
    path('', index, name='index'),
    path('api/', include('lab.urls')),
    path('admin/', admin.site.urls),
]
