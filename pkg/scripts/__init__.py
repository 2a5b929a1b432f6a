# Scripts package initialization