export * from './types.js'
export * from './render.js'
export * from './gestures.js'
export * from './client.js'
