import os

import django


os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'secres.settings')
django.setup()
