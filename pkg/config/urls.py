"""
URL configuration for the jumpsift project: the admin hosts the run registry.
"""
from django.contrib import admin
from django.urls import path

urlpatterns = [
    path('admin/', admin.site.urls),
]
