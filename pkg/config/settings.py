"""
Django settings for the jumpsift project.

Tunables come from the environment (or a .env file at BASE_DIR) through
django-environ.
"""

from pathlib import Path
import os
import environ

env = environ.Env(
    DEBUG=(bool, False),
    JUMPSIFT_THREADS=(int, 0),
    JUMPSIFT_MDPDE_TOL=(float, 1e-10),
    JUMPSIFT_MDPDE_MAX_ITERS=(int, 2000),
)

BASE_DIR = Path(__file__).resolve().parent.parent

environ.Env.read_env(os.path.join(BASE_DIR, '.env'))

# Only the admin run registry is served; the key just has to exist locally.
SECRET_KEY = env('SECRET_KEY', default='django-insecure-jumpsift-local-only')

DEBUG = env('DEBUG')

ALLOWED_HOSTS = env.list('ALLOWED_HOSTS', default=['localhost', '127.0.0.1'])


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    # Local apps
    'apps.diffusion',
    'apps.detection',
    'apps.experiments',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'config.urls'

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


# Database (run registry only)

DATABASES = {
    'default': env.db('DATABASE_URL', default=f'sqlite:///{BASE_DIR / "db.sqlite3"}')
}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

STATIC_URL = 'static/'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Logging

JUMPSIFT_LOG_LEVEL = env('JUMPSIFT_LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'apps': {
            'handlers': ['console'],
            'level': JUMPSIFT_LOG_LEVEL,
            'propagate': False,
        },
    },
}


# Experiment harness

# Worker cap for `manage.py grid`; 0 means the machine default.
JUMPSIFT_THREADS = env('JUMPSIFT_THREADS')
JUMPSIFT_OUTPUT_DIR = env('JUMPSIFT_OUTPUT_DIR', default=str(BASE_DIR / 'results'))
JUMPSIFT_DEFAULT_THRESHOLD = env('JUMPSIFT_DEFAULT_THRESHOLD', default='gumbel:0.05')
JUMPSIFT_MDPDE_TOL = env('JUMPSIFT_MDPDE_TOL')
JUMPSIFT_MDPDE_MAX_ITERS = env('JUMPSIFT_MDPDE_MAX_ITERS')
