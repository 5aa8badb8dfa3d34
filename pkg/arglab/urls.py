from django.contrib import admin
from django.urls import path

urlpatterns = [
    # Registro de corridas y reportes (experiments.models)
    path("admin/", admin.site.urls),
]
