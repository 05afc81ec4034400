"""
Django settings for the morphotok project.

Toolkit defaults live in the MORPHOTOK dictionary at the bottom; every value
can be overridden from the environment (or a `.env` file next to manage.py).
"""

from pathlib import Path
import os

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')


def _int_list(value):
    return tuple(int(v) for v in value.split(',') if v.strip())


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('DJANGO_SECRET_KEY', 'django-insecure-development-key-change-in-production')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.getenv('DJANGO_DEBUG', 'True') == 'True'

ALLOWED_HOSTS = os.getenv('DJANGO_ALLOWED_HOSTS', 'localhost,127.0.0.1,testserver').split(',')

CSRF_TRUSTED_ORIGINS = os.getenv('DJANGO_CSRF_TRUSTED_ORIGINS', 'http://localhost:3000,http://localhost:5173,http://localhost:8000').split(',')

# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'rest_framework',
    'corsheaders',
    'channels',
    'lab',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'corsheaders.middleware.CorsMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'morphotok.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'morphotok.wsgi.application'
ASGI_APPLICATION = 'morphotok.asgi.application'


# Database

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('MORPHOTOK_DB', str(BASE_DIR / 'db.sqlite3')),
    }
}


AUTH_PASSWORD_VALIDATORS = [
    {'NAME': 'django.contrib.auth.password_validation.UserAttributeSimilarityValidator'},
    {'NAME': 'django.contrib.auth.password_validation.MinimumLengthValidator'},
]


LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True


STATIC_URL = '/static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST Framework
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'UNAUTHENTICATED_USER': None,
}

# CORS Settings
CORS_ALLOW_ALL_ORIGINS = os.getenv('CORS_ALLOW_ALL_ORIGINS', str(DEBUG)) == 'True'
CORS_ALLOWED_ORIGINS = os.getenv('CORS_ALLOWED_ORIGINS', 'http://localhost:3000,http://localhost:5173,http://localhost:8000').split(',')

# Channels
# In-memory layer by default; set MORPHOTOK_REDIS_HOST to share progress across processes
CHANNEL_LAYERS = {
    "default": {
        "BACKEND": "channels.layers.InMemoryChannelLayer"
    }
}

if os.getenv('MORPHOTOK_REDIS_HOST'):
    CHANNEL_LAYERS = {
        "default": {
            "BACKEND": "channels_redis.core.RedisChannelLayer",
            "CONFIG": {
                "hosts": [(os.getenv('MORPHOTOK_REDIS_HOST'), int(os.getenv('MORPHOTOK_REDIS_PORT', '6379')))],
            },
        },
    }

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'component': {
            'format': '[%(name)s] %(levelname)s %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'component',
        },
    },
    'loggers': {
        'lab': {
            'handlers': ['console'],
            'level': os.getenv('MORPHOTOK_LOG_LEVEL', 'INFO'),
        },
        'morphotok': {
            'handlers': ['console'],
            'level': os.getenv('MORPHOTOK_LOG_LEVEL', 'INFO'),
        },
    },
}

# Toolkit defaults
MORPHOTOK = {
    'VOCAB_SIZES': _int_list(os.getenv('MORPHOTOK_VOCAB_SIZES', '8192,16384,50277')),
    'RENYI_ALPHA': float(os.getenv('MORPHOTOK_RENYI_ALPHA', '2.5')),
    'MARKER': os.getenv('MORPHOTOK_MARKER', '@@'),
    'UNK_TOKEN': os.getenv('MORPHOTOK_UNK_TOKEN', '<unk>'),
    'NORMALIZATION': os.getenv('MORPHOTOK_NORMALIZATION', 'NFC'),
    'MDL_EPOCHS': int(os.getenv('MORPHOTOK_MDL_EPOCHS', '5')),
    'UNIGRAM': {
        'max_piece_length': 16,
        'seed_factor': 25,
        'seed_cap': 1_000_000,
        'em_iterations': 2,
        'shrink_ratio': 0.25,
    },
    'DEFAULT_SEED': int(os.getenv('MORPHOTOK_SEED', '0')),
    'RUN_WORKERS': int(os.getenv('MORPHOTOK_RUN_WORKERS', '1')),
}
