import os
from pathlib import Path
from dotenv import load_dotenv


BASE_DIR = Path(__file__).resolve().parent.parent

# Cargamos el .env de la raíz (credenciales de proveedores y overrides ARGLAB_*)
load_dotenv(os.path.join(BASE_DIR, ".env"))

# Seguridad

SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "dev-secret-key")
DEBUG = os.getenv("DJANGO_DEBUG", "1") == "1"
ALLOWED_HOSTS = ["*"]

# Aplicaciones instaladas
INSTALLED_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",

    # Dependencias
    "rest_framework",

    # Apps propias
    "factors",
    "scenarios",
    "arguments",
    "ai_agent",
    "pipelines",
    "reports",
    "experiments",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "arglab.urls"

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = "arglab.wsgi.application"

# Base de datos (SQLite por simplicidad): solo guarda el registro de corridas
DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

# Internacionalización
LANGUAGE_CODE = "es-es"
TIME_ZONE = "America/Bogota"
USE_I18N = True
USE_TZ = True

STATIC_URL = 'static/'

# Django REST Framework (solo usamos sus serializers para validar JSON)
REST_FRAMEWORK = {
    "DEFAULT_PERMISSION_CLASSES": [
        "rest_framework.permissions.IsAdminUser",
    ],
}

# =========================
# CREDENCIALES DE PROVEEDORES
# =========================
# Los archivos de configuración solo nombran la variable de entorno (api_key_env);
# estas dos son las que se usan por defecto.
GEMINI_API_KEY = os.getenv("GEMINI_API_KEY")
OPENAI_API_KEY = os.getenv("OPENAI_API_KEY")

# =========================
# PARÁMETROS DEL LABORATORIO
# =========================
ARGLAB = {
    # Archivo JSONL alternativo para el catálogo de factores (None = catálogo compilado)
    "FACTOR_CATALOG_PATH": os.getenv("ARGLAB_FACTOR_CATALOG_PATH") or None,
    "DEFAULT_WORKERS": int(os.getenv("ARGLAB_DEFAULT_WORKERS", "4")),
    "MAX_RETRIES": int(os.getenv("ARGLAB_MAX_RETRIES", "3")),
    "RETRY_BACKOFF_SECONDS": float(os.getenv("ARGLAB_RETRY_BACKOFF_SECONDS", "1.0")),
    "REQUEST_TIMEOUT_SECONDS": float(os.getenv("ARGLAB_REQUEST_TIMEOUT_SECONDS", "60")),
    "MAX_PROMPT_CHARS": int(os.getenv("ARGLAB_MAX_PROMPT_CHARS", "48000")),
    "OUTPUT_DIR": os.getenv("ARGLAB_OUTPUT_DIR", str(BASE_DIR / "runs")),
}

# =========================
# LOGGING
# =========================
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": os.getenv("ARGLAB_LOG_LEVEL", "WARNING"),
    },
    "loggers": {
        "django": {
            "handlers": ["console"],
            "level": "WARNING",
            "propagate": False,
        },
    },
}
