"""
WSGI config for arglab project.

Only needed to browse the run registry through the Django admin
(``python manage.py runserver``).
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'arglab.settings')

application = get_wsgi_application()
