"""
ASGI config for arglab project.

Same role as wsgi.py: serves the Django admin over the run registry.
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'arglab.settings')

application = get_asgi_application()
